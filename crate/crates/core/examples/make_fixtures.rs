//! Regenerates `fixtures/`: a small ontology, a code scheme, a toy embedding
//! model and a two-volume proceedings archive of 29 chapters.
//!
//! ```text
//! cargo run -p topic-annotator --example make_fixtures
//! ```

use std::path::Path;

use quick_xml::escape::escape;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use topic_annotator::ingest::write_archive;

const HIERARCHY: &[(&str, &[&str])] = &[
    (
        "computer science",
        &[
            "artificial intelligence",
            "semantic web",
            "computer networks",
            "computer security",
            "information retrieval",
            "databases",
            "world wide web",
            "e-learning",
        ],
    ),
    ("artificial intelligence", &["machine learning", "natural language processing", "knowledge representation"]),
    ("machine learning", &["neural networks", "deep learning"]),
    ("neural networks", &["convolutional neural networks"]),
    (
        "natural language processing",
        &["text mining", "information extraction", "named entity recognition", "entity linking", "question answering"],
    ),
    (
        "semantic web",
        &["linked data", "rdf", "sparql", "ontology", "knowledge graphs", "semantic search", "provenance"],
    ),
    ("linked data", &["linked open data"]),
    ("ontology", &["ontology engineering", "ontology matching", "ontology learning"]),
    ("knowledge representation", &["knowledge graphs", "ontology engineering"]),
    ("databases", &["query processing", "triple stores"]),
    ("sparql", &["triple stores"]),
    ("computer networks", &["internet of things", "sensor networks"]),
    ("internet of things", &["smart cities"]),
    ("computer security", &["cryptography", "access control"]),
    ("cryptography", &["encryption", "public key cryptography"]),
    ("world wide web", &["social networks", "social media", "crowdsourcing"]),
    ("social networks", &["online communities"]),
    ("information retrieval", &["semantic search", "question answering"]),
];

const EQUIVALENT: &[(&str, &str)] = &[
    ("ontology matching", "ontology mapping"),
    ("internet of things", "iot"),
    ("rdf", "resource description framework"),
];

const CONTRIBUTES: &[(&str, &str)] = &[("knowledge graphs", "question answering")];

fn label(id: &str) -> String {
    match id {
        "rdf" => "RDF".into(),
        "sparql" => "SPARQL".into(),
        "iot" => "IoT".into(),
        "e-learning" => "E-Learning".into(),
        _ => id
            .split(' ')
            .map(|w| {
                let mut c = w.chars();
                match c.next() {
                    Some(f) if !["of", "and"].contains(&w) => f.to_uppercase().chain(c).collect(),
                    _ => w.to_string(),
                }
            })
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn ontology() -> serde_json::Value {
    let mut ids: Vec<&str> = Vec::new();
    let mut push = |id| {
        if !ids.contains(&id) {
            ids.push(id);
        }
    };
    for (p, cs) in HIERARCHY {
        push(*p);
        cs.iter().for_each(|c| push(*c));
    }
    for (a, b) in EQUIVALENT {
        push(*a);
        push(*b);
    }
    ids.sort();
    let topics: Vec<_> = ids.iter().map(|id| json!({"id": id, "label": label(id)})).collect();
    let mut relations = Vec::new();
    for (p, cs) in HIERARCHY {
        for c in *cs {
            relations.push(json!({"type": "superTopicOf", "source": p, "target": c}));
        }
    }
    for (a, b) in EQUIVALENT {
        relations.push(json!({"type": "relatedEquivalent", "source": a, "target": b}));
    }
    for (a, b) in CONTRIBUTES {
        relations.push(json!({"type": "contributesTo", "source": a, "target": b}));
    }
    json!({"topics": topics, "relations": relations})
}

fn scheme() -> serde_json::Value {
    let codes = [
        ("I00001", "Computer Science, general", 1, None),
        ("I15009", "Data Structures, Cryptology and Information Theory", 2, Some("I00001")),
        ("I15033", "Data Encryption", 3, Some("I15009")),
        ("I21000", "Artificial Intelligence", 2, Some("I00001")),
        ("I21017", "Machine Learning", 3, Some("I21000")),
        ("I21040", "Natural Language Processing (NLP)", 3, Some("I21000")),
        ("I18000", "Information Systems Applications", 2, Some("I00001")),
        ("I18040", "Information Storage and Retrieval", 3, Some("I18000")),
        ("I18024", "Database Management", 3, Some("I18000")),
        ("I13000", "Computer Communication Networks", 2, Some("I00001")),
        ("I13022", "Internet of Things", 3, Some("I13000")),
        ("I13030", "Computer and Society", 3, Some("I13000")),
        ("I28000", "Security", 2, Some("I00001")),
        ("I28060", "Systems and Data Security", 3, Some("I28000")),
    ];
    let mapping = [
        ("I15033", "cryptography"),
        ("I15033", "encryption"),
        ("I15033", "public key cryptography"),
        ("I28060", "access control"),
        ("I28060", "computer security"),
        ("I21017", "machine learning"),
        ("I21017", "neural networks"),
        ("I21040", "natural language processing"),
        ("I21040", "information extraction"),
        ("I18040", "information retrieval"),
        ("I18040", "semantic web"),
        ("I18040", "semantic search"),
        ("I18024", "databases"),
        ("I18024", "linked data"),
        ("I18024", "sparql"),
        ("I13022", "internet of things"),
        ("I13022", "smart cities"),
        ("I13030", "social networks"),
        ("I13030", "online communities"),
    ];
    json!({
        "codes": codes.iter().map(|(c, l, lv, p)| json!({"code": c, "label": l, "level": lv, "parent": p})).collect::<Vec<_>>(),
        "mapping": mapping.iter().map(|(c, t)| json!({"code": c, "topic": t})).collect::<Vec<_>>(),
    })
}

const DIM: usize = 16;
const GENERIC_AXES: std::ops::Range<usize> = 8..16;

/// Each cluster lives near its own axis; generic vocabulary lives in the last eight.
const CLUSTERS: &[&[&str]] = &[
    &["twitter", "facebook", "tweets", "posts", "social_networks", "online_communities", "social_media", "microblogs"],
    &["sensors", "devices", "smart_cities", "internet_of_things", "iot", "wearables", "sensor_networks"],
    &["neural_networks", "deep_learning", "convolutional_neural_networks", "backpropagation", "embeddings"],
    &["rdf", "sparql", "linked_data", "triples", "knowledge_graphs", "semantic_web", "triple_stores", "ontologies"],
    &["text_mining", "information_extraction", "natural_language_processing", "entity_linking", "named_entity_recognition", "corpus"],
    &["encryption", "cryptography", "signatures", "public_key_cryptography", "ciphertext"],
    &["question_answering", "questions", "answers", "semantic_search", "retrieval"],
];

const COMMON: &[&str] = &[
    "the", "of", "and", "to", "in", "a", "is", "for", "we", "on", "with", "that", "by", "this", "as", "are", "from",
    "data", "learning", "web", "system", "systems", "method", "methods", "approach", "paper", "results", "users",
    "model", "models", "graph", "graphs", "information", "knowledge", "network", "networks", "semantic", "study",
    "analysis", "large", "new", "based", "use", "time", "query", "queries", "language", "natural", "processing",
    "public", "open", "evaluation", "experiments", "performance", "show", "present", "propose", "describe",
    "different", "real", "work", "problem", "quality", "set", "sets", "number", "high", "task", "tasks",
];

fn model() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2018);
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    let generic = |rng: &mut ChaCha8Rng| {
        let mut v = vec![0.0; DIM];
        for (i, x) in v.iter_mut().enumerate() {
            *x = if GENERIC_AXES.contains(&i) { rng.random_range(-1.0..1.0) } else { rng.random_range(-0.05..0.05) };
        }
        v
    };
    for w in COMMON {
        let v = generic(&mut rng);
        rows.push((w.to_string(), v));
    }
    let mut i = 0;
    while rows.len() < 3000 {
        let v = generic(&mut rng);
        rows.push((format!("common{i:04}"), v));
        i += 1;
    }
    for (axis, words) in CLUSTERS.iter().enumerate() {
        for w in *words {
            let mut v: Vec<f64> = (0..DIM).map(|_| rng.random_range(-0.28..0.28)).collect();
            v[axis] = 1.0;
            rows.push((w.to_string(), v));
        }
    }
    for i in 0..200 {
        let v = generic(&mut rng);
        rows.push((format!("rare{i:03}"), v));
    }
    let mut out = format!("{} {DIM}\n", rows.len());
    for (t, v) in rows {
        out.push_str(&t);
        for x in v {
            out.push_str(&format!(" {x:.5}"));
        }
        out.push('\n');
    }
    out
}

struct Paper {
    title: &'static str,
    r#abstract: &'static str,
    keywords: &'static [&'static str],
}

const VOLUME_1: &[Paper] = &[
    Paper {
        title: "Learning Embeddings for Knowledge Graphs",
        r#abstract: "Knowledge graphs encode facts as triples. We train neural networks that embed entities of large knowledge graphs and evaluate link prediction on linked data benchmarks.",
        keywords: &["knowledge graphs", "embeddings", "link prediction"],
    },
    Paper {
        title: "Ontology Matching with Lexical and Structural Evidence",
        r#abstract: "We present a system for ontology matching that combines string similarity with structural features of the input ontologies. Experiments on standard alignment tracks show improved precision.",
        keywords: &["ontology matching", "alignment"],
    },
    Paper {
        title: "Efficient SPARQL Query Processing over Linked Data",
        r#abstract: "We describe query processing techniques for SPARQL endpoints that publish linked data, reducing response time by caching intermediate results.",
        keywords: &["SPARQL", "query processing", "linked data"],
    },
    Paper {
        title: "Entity Linking in Scholarly Text",
        r#abstract: "Natural language processing pipelines often need entity linking. We combine information extraction with a knowledge graph of researchers to disambiguate author names.",
        keywords: &["entity linking", "information extraction"],
    },
    Paper {
        title: "Semantic Annotation of Tweets",
        r#abstract: "We analyse how Twitter and Facebook posts discuss breaking events, and annotate the tweets with linked data resources.",
        keywords: &["semantic annotation", "microblogs"],
    },
    Paper {
        title: "RDF Stream Processing for the Internet of Things",
        r#abstract: "Sensors in smart cities produce RDF streams. We propose a stream reasoner for the internet of things that answers continuous queries.",
        keywords: &["RDF", "stream reasoning", "internet of things"],
    },
    Paper {
        title: "Question Answering over Knowledge Graphs",
        r#abstract: "Question answering systems translate questions into SPARQL queries over knowledge graphs. We use neural networks for the translation step.",
        keywords: &["question answering", "knowledge graphs"],
    },
    Paper {
        title: "Schema Inference for Linked Open Data",
        r#abstract: "We infer schemas from linked open data sources and evaluate each inferred ontology with domain experts.",
        keywords: &["linked open data", "ontology engineering"],
    },
    Paper {
        title: "Text Mining for Ontology Learning",
        r#abstract: "We apply text mining and information extraction to build an ontology from technical documents.",
        keywords: &["text mining", "ontology learning"],
    },
    Paper {
        title: "Privacy-Preserving Publication of Linked Data",
        r#abstract: "Sensitive linked data must be protected before release. We combine encryption with access control for RDF datasets.",
        keywords: &["cryptography", "access control", "linked data"],
    },
    Paper {
        title: "Explaining Neural Networks with Ontologies",
        r#abstract: "We use ontologies to explain the predictions of deep learning models, including convolutional neural networks on image data.",
        keywords: &["explainable AI", "deep learning"],
    },
    Paper {
        title: "Knowledge Representation for Scientific Workflows",
        r#abstract: "We propose an ontology for the knowledge representation of scientific workflows and their provenance on the semantic web.",
        keywords: &["knowledge representation", "provenance"],
    },
    Paper {
        title: "Benchmarking Triple Stores",
        r#abstract: "We benchmark triple stores on SPARQL workloads derived from real query logs of linked data portals.",
        keywords: &["SPARQL", "benchmark"],
    },
    Paper {
        title: "Named Entity Recognition for Biomedical Linked Data",
        r#abstract: "Named entity recognition finds drug and gene mentions, which natural language processing then links to linked data vocabularies.",
        keywords: &["named entity recognition", "natural language processing"],
    },
    Paper {
        title: "Crowdsourcing Ontology Alignment",
        r#abstract: "Online communities of volunteers validate candidate correspondences produced by ontology mapping tools.",
        keywords: &["ontology mapping", "crowdsourcing"],
    },
];

const VOLUME_2: &[Paper] = &[
    Paper {
        title: "A Knowledge Graph of Smart City Sensors",
        r#abstract: "We publish knowledge graphs describing sensors and devices of the internet of things in three smart cities.",
        keywords: &["knowledge graphs", "internet of things", "smart cities"],
    },
    Paper {
        title: "Linked Data for Cultural Heritage",
        r#abstract: "Museums publish collection metadata as linked data. We report on a semantic web portal built on these datasets.",
        keywords: &["linked data", "semantic web"],
    },
    Paper {
        title: "An Ontology for IoT Security",
        r#abstract: "We model threats and cryptography protocols for connected devices in an ontology for computer security.",
        keywords: &["ontology", "computer security", "IoT"],
    },
    Paper {
        title: "Semantic Search for Social Media Posts",
        r#abstract: "We index Twitter posts with linked data entities and offer semantic search to journalists.",
        keywords: &["semantic search", "social media"],
    },
    Paper {
        title: "Machine Learning over RDF Graphs",
        r#abstract: "We compare machine learning methods that operate directly on RDF graphs for node classification.",
        keywords: &["machine learning", "RDF"],
    },
    Paper {
        title: "Signatures for Linked Data",
        r#abstract: "We propose signatures for RDF graphs based on public key cryptography, so that consumers of linked data can verify provenance.",
        keywords: &["public key cryptography", "linked data"],
    },
    Paper {
        title: "Information Extraction from Web Tables",
        r#abstract: "Information extraction from web tables populates knowledge graphs with new facts.",
        keywords: &["information extraction", "web tables"],
    },
    Paper {
        title: "A Linked Data Platform for E-Learning",
        r#abstract: "We describe an e-learning platform that recommends course material using linked data and an ontology of learning objectives.",
        keywords: &["e-learning", "linked data"],
    },
    Paper {
        title: "A Corpus of Abstracts for Text Mining",
        r#abstract: "We release a corpus of abstracts for text mining and natural language processing research, aligned with knowledge graphs.",
        keywords: &["text mining", "corpus"],
    },
    Paper {
        title: "Ontology Design Patterns in Practice",
        r#abstract: "We collect design patterns used in ontology engineering projects and analyse their reuse on the semantic web.",
        keywords: &["ontology engineering", "design patterns"],
    },
    Paper {
        title: "Federated SPARQL Queries over Linked Open Data",
        r#abstract: "We study query processing for federated SPARQL queries across linked open data endpoints.",
        keywords: &["SPARQL", "federation"],
    },
    Paper {
        title: "Monitoring Online Communities with Knowledge Graphs",
        r#abstract: "We track discussions in online communities and social networks and link them to knowledge graphs of topics.",
        keywords: &["social networks", "knowledge graphs"],
    },
    Paper {
        title: "Neural Entity Typing",
        r#abstract: "We train deep learning models for entity typing in knowledge graphs using natural language processing of entity descriptions.",
        keywords: &["entity typing", "deep learning"],
    },
    Paper {
        title: "Validating RDF with Shapes",
        r#abstract: "We present a shape language for validating RDF data and evaluate it on linked data from public administrations.",
        keywords: &["RDF", "data validation"],
    },
];

fn book_xml(volume: &str, title: &str, papers: &[Paper], first_id: usize) -> String {
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<book volume=\"{volume}\" series=\"Lecture Notes in Computer Science\" conf-series-id=\"iswc\" year=\"2018\">\n  <title>{}</title>\n",
        escape(title)
    );
    for (i, p) in papers.iter().enumerate() {
        out.push_str(&format!("  <chapter id=\"{volume}-{:02}\">\n", first_id + i));
        out.push_str(&format!("    <title>{}</title>\n", escape(p.title)));
        out.push_str(&format!("    <abstract>{}</abstract>\n", escape(p.r#abstract)));
        out.push_str("    <keywords>");
        for k in p.keywords {
            out.push_str(&format!("<kw>{}</kw>", escape(*k)));
        }
        out.push_str("</keywords>\n  </chapter>\n");
    }
    out.push_str("</book>\n");
    out
}

fn gold() -> serde_json::Value {
    json!([
        {"paperId": "11136-01", "topics": ["knowledge graphs", "neural networks", "linked data"]},
        {"paperId": "11136-02", "topics": ["ontology matching", "ontology"]},
        {"paperId": "11136-03", "topics": ["sparql", "query processing", "linked data"]},
        {"paperId": "11136-05", "topics": ["social media", "online communities", "linked data"]},
        {"paperId": "11137-01", "topics": ["internet of things", "smart cities", "knowledge graphs", "sensor networks"]}
    ])
}

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).unwrap() + "\n";
    std::fs::write(dir.join("ontology.json"), pretty(&ontology()))?;
    std::fs::write(dir.join("scheme.json"), pretty(&scheme()))?;
    std::fs::write(dir.join("model.txt"), model())?;
    std::fs::write(dir.join("gold.json"), pretty(&gold()))?;

    let v1 = book_xml("11136", "The Semantic Web - ISWC 2018, Part I", VOLUME_1, 1);
    let v2 = book_xml("11137", "The Semantic Web - ISWC 2018, Part II", VOLUME_2, 1);
    let zip = write_archive([
        ("iswc2018/11136.xml", v1.as_bytes()),
        ("iswc2018/11137.xml", v2.as_bytes()),
        ("iswc2018/README.txt", b"Chapter metadata for LNCS 11136 and 11137.\n".as_slice()),
    ])?;
    std::fs::write(dir.join("iswc2018.zip"), zip)?;
    std::fs::write(dir.join("11136.xml"), v1)?;
    println!("wrote fixtures to {}", dir.display());
    Ok(())
}
