mod common;

use std::sync::{Arc, OnceLock};
use std::time::Duration;

use common::{fixture, spawn_service};
use serde_json::{json, Value};
use topic_annotator::classifier::ClassifierConfig;
use topic_annotator::history::AnnotationStore;
use topic_annotator::ingest::write_archive;
use topic_annotator::pipeline::{Engine, EngineConfig};
use topic_annotator::service::AppState;

fn load_engine() -> Engine {
    Engine::load(&EngineConfig {
        ontology: fixture("ontology.json"),
        model: Some(fixture("model.txt")),
        scheme: Some(fixture("scheme.json")),
        classifier: ClassifierConfig::default(),
    })
    .unwrap()
}

fn engine() -> Arc<Engine> {
    static ENGINE: OnceLock<Arc<Engine>> = OnceLock::new();
    Arc::clone(ENGINE.get_or_init(|| Arc::new(load_engine())))
}

struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    fn start() -> Client {
        let state = AppState::new(engine(), Arc::new(AnnotationStore::in_memory()));
        Client::with_state(Arc::new(state))
    }

    fn with_state(state: Arc<AppState>) -> Client {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Client { base: spawn_service(state), agent }
    }

    fn read(r: ureq::http::Response<ureq::Body>) -> (u16, Value) {
        let mut r = r;
        let status = r.status().as_u16();
        let text = r.body_mut().read_to_string().unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    fn get(&self, path: &str) -> (u16, Value) {
        Self::read(self.agent.get(format!("{}{path}", self.base)).call().unwrap())
    }

    fn post(&self, path: &str, content_type: &str, body: &[u8]) -> (u16, Value) {
        Self::read(self.agent.post(format!("{}{path}", self.base)).header("Content-Type", content_type).send(body).unwrap())
    }

    fn post_json(&self, path: &str, body: &Value) -> (u16, Value) {
        self.post(path, "application/json", body.to_string().as_bytes())
    }

    fn upload(&self) -> String {
        let zip = std::fs::read(fixture("iswc2018.zip")).unwrap();
        let (status, v) = self.post("/sessions", "application/zip", &zip);
        assert_eq!(status, 201, "{v}");
        v["sessionId"].as_str().unwrap().to_string()
    }
}

#[test]
fn health_reports_resources() {
    let c = Client::start();
    let (status, v) = c.get("/health");
    assert_eq!(status, 200);
    assert_eq!(v["status"], "ok");
    assert!(v["topics"].as_u64().unwrap() > 40);
    assert_eq!(v["codes"], 14);
    assert_eq!(v["sessions"], 0);
}

#[test]
fn upload_errors_map_to_status_codes() {
    let c = Client::start();
    let (status, v) = c.post("/sessions", "application/zip", b"PK\x03\x04 broken");
    assert_eq!((status, v["code"].as_str()), (400, Some("parse_error")));

    let empty = write_archive([("README.txt", &b"nothing here"[..])]).unwrap();
    let (status, v) = c.post("/sessions", "application/zip", &empty);
    assert_eq!(status, 422);
    assert!(v["message"].as_str().unwrap().contains("no books"), "{v}");

    let (status, _) = c.post("/sessions", "application/xml", br#"<book volume="1" series="LNCS"><title>T</title>"#);
    assert_eq!(status, 400);
    let (status, _) = c.post("/sessions", "application/xml", b"<book><title>T</title></book>");
    assert_eq!(status, 422);

    let (status, v) = c.get("/sessions/nope/taxonomy");
    assert_eq!((status, v["code"].as_str()), (404, Some("not_found")));
}

#[test]
fn multipart_upload_and_single_xml() {
    let c = Client::start();
    let zip = std::fs::read(fixture("iswc2018.zip")).unwrap();
    let boundary = "XyZbOuNdArY";
    let mut body = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"archive\"; filename=\"iswc2018.zip\"\r\nContent-Type: application/zip\r\n\r\n"
    )
    .into_bytes();
    body.extend_from_slice(&zip);
    body.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());
    let (status, v) = c.post("/sessions", &format!("multipart/form-data; boundary={boundary}"), &body);
    assert_eq!(status, 201, "{v}");
    assert_eq!(v["chapterCount"], 29);
    assert_eq!(v["confSeriesId"], "iswc");
    assert_eq!(v["year"], 2018);

    let xml = std::fs::read(fixture("11136.xml")).unwrap();
    let (status, v) = c.post("/sessions", "application/xml", &xml);
    assert_eq!(status, 201, "{v}");
    assert_eq!(v["chapterCount"], 15);
}

#[test]
fn taxonomy_slider_and_validation() {
    let state = AppState::new(Arc::new(load_engine()), Arc::new(AnnotationStore::in_memory()));
    let c = Client::with_state(Arc::new(state));
    let id = c.upload();
    let (_, all) = c.get(&format!("/sessions/{id}/taxonomy"));
    assert_eq!(all["minChapters"], 1);
    let (_, high) = c.get(&format!("/sessions/{id}/taxonomy?minChapters=13"));
    fn visit(nodes: &Value, f: &mut dyn FnMut(&Value)) {
        for n in nodes.as_array().unwrap() {
            f(n);
            visit(&n["children"], f);
        }
    }
    visit(&high["taxonomy"], &mut |n| {
        let count = n["chapterCount"].as_u64().unwrap();
        assert!(n["structural"].as_bool().unwrap() || count >= 13, "{n}");
    });
    for bad in ["0", "-2", "many"] {
        let (status, v) = c.get(&format!("/sessions/{id}/taxonomy?minChapters={bad}"));
        assert_eq!((status, v["code"].as_str()), (400, Some("bad_request")));
    }
    let (_, again) = c.get(&format!("/sessions/{id}/taxonomy?minChapters=13"));
    assert_eq!(again["taxonomy"], high["taxonomy"]);
    assert_eq!(c.get("/health").1["classificationRuns"], 1);
}

#[test]
fn explanation_chapters_and_topics() {
    let c = Client::start();
    let id = c.upload();
    let (status, ex) = c.get(&format!("/sessions/{id}/topics/Semantic%20Web/explanation"));
    assert_eq!(status, 200, "{ex}");
    assert_eq!(ex["topic"], "semantic web");
    let excerpts = ex["excerpts"].as_array().unwrap();
    assert!(!excerpts.is_empty());
    let counts: Vec<u64> = excerpts.iter().map(|e| e["chapterCount"].as_u64().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));

    let (status, _) = c.get(&format!("/sessions/{id}/topics/quantum%20gravity/explanation"));
    assert_eq!(status, 404);

    let (_, chapters) = c.get(&format!("/sessions/{id}/chapters"));
    let chapters = chapters["chapters"].as_array().unwrap();
    assert_eq!(chapters.len(), 29);
    let with_highlights = chapters.iter().filter(|ch| !ch["highlights"].as_array().unwrap().is_empty()).count();
    assert!(with_highlights > 20);

    let (status, t) = c.get("/topics/linked%20data");
    assert_eq!(status, 200);
    assert!(t["superTopics"].as_array().unwrap().contains(&json!("semantic web")));
    assert_eq!(c.get("/topics/no%20such%20topic").0, 404);
}

#[test]
fn sessions_classify_identically() {
    let c = Client::start();
    let (a, b) = (c.upload(), c.upload());
    assert_ne!(a, b);
    let (_, ta) = c.get(&format!("/sessions/{a}/taxonomy?minChapters=2"));
    let (_, tb) = c.get(&format!("/sessions/{b}/taxonomy?minChapters=2"));
    for key in ["taxonomy", "topics", "pmcs"] {
        assert_eq!(ta[key], tb[key]);
    }
}

#[test]
fn submit_conflicts_and_schema_errors() {
    let c = Client::start();
    let id = c.upload();
    let path = format!("/sessions/{id}/submit");
    let cases = [
        json!({"selectedTopics": ["quantum gravity"]}),
        json!({"selectedTopics": [], "removedTopics": ["quantum gravity"]}),
        json!({"selectedTopics": [], "renames": {"quantum gravity": "QG"}}),
        json!({"selectedTopics": [], "addedTopics": [{"topic": "new thing", "parent": "quantum gravity"}]}),
        json!({"selectedTopics": [], "selectedPmcs": ["Z99999"]}),
    ];
    for body in &cases {
        let (status, v) = c.post_json(&path, body);
        assert_eq!((status, v["code"].as_str()), (409, Some("conflict")), "{body}");
    }
    let (status, _) = c.post_json(&path, &json!({"selectedTopics": [], "bogus": 1}));
    assert_eq!(status, 422);
    let (status, _) = c.post("/sessions/missing/submit", "application/json", b"{}");
    assert_eq!(status, 404);

    let ok = json!({
        "selectedTopics": ["new thing"],
        "addedTopics": [{"topic": "new thing", "parent": "semantic web"}],
        "selectedPmcs": ["I15033"]
    });
    let (status, v) = c.post_json(&path, &ok);
    assert_eq!(status, 201, "{v}");
    assert_eq!(v["record"]["confSeriesId"], "iswc");
}

#[test]
fn previous_edition_and_renames_persist() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("history.jsonl");
    let rename = json!({"internet of things": "Internet of Things (IoT)"});
    {
        let store = AnnotationStore::open(&history).unwrap();
        let c = Client::with_state(Arc::new(AppState::new(engine(), Arc::new(store))));
        let id = c.upload();
        let body = json!({
            "year": 2017,
            "selectedTopics": ["linked data", "internet of things"],
            "addedTopics": [{"topic": "internet of things", "parent": "computer science"}],
            "renames": rename,
            "selectedPmcs": ["I15033"]
        });
        let (status, v) = c.post_json(&format!("/sessions/{id}/submit"), &body);
        assert_eq!(status, 201, "{v}");
        assert_eq!(v["receipt"], 1);
    }

    // a fresh service over the same file sees the earlier edition
    let store = AnnotationStore::open(&history).unwrap();
    let c = Client::with_state(Arc::new(AppState::new(engine(), Arc::new(store))));
    let (_, h) = c.get("/series/iswc/history");
    let records = h["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["renames"], rename);

    let id = c.upload();
    let (_, t) = c.get(&format!("/sessions/{id}/taxonomy"));
    assert_eq!(t["previousEdition"]["year"], 2017);
    let flag = |list: &Value, key: &str, id: &str| {
        list.as_array().unwrap().iter().find(|x| x[key] == id).map(|x| x["previousEdition"].clone())
    };
    assert_eq!(flag(&t["topics"], "topic", "linked data"), Some(json!(true)));
    assert_eq!(flag(&t["topics"], "topic", "semantic web"), Some(json!(false)));
    assert_eq!(flag(&t["pmcs"], "code", "I15033"), Some(json!(true)));
    assert_eq!(c.get("/series/unknown/history").1["records"], json!([]));
}

#[test]
fn idle_sessions_are_evicted() {
    let state = Arc::new(
        AppState::new(engine(), Arc::new(AnnotationStore::in_memory())).with_idle_timeout(Duration::from_millis(50)),
    );
    let c = Client::with_state(Arc::clone(&state));
    let id = c.upload();
    assert_eq!(state.session_count(), 1);
    std::thread::sleep(Duration::from_millis(120));
    assert_eq!(state.evict_idle(), 1);
    assert_eq!(c.get(&format!("/sessions/{id}/chapters")).0, 404);
}
