//! Book metadata ingestion from ZIP archives of per-book XML documents.
//!
//! Schema:
//!
//! ```text
//! <book volume="V" series="S" conf-series-id="C" year="Y">
//!   <title>T</title>
//!   <chapter id="ID">
//!     <title>..</title>
//!     <abstract>..</abstract>
//!     <keywords><kw>..</kw>*</keywords>
//!   </chapter>+
//! </book>
//! ```

use std::collections::HashSet;
use std::io::{Cursor, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::text::collapse_whitespace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Chapter {
    pub chapter_id: String,
    pub title: String,
    pub r#abstract: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Book {
    pub volume_number: String,
    pub series_name: String,
    pub conf_series_id: Option<String>,
    pub year: Option<i32>,
    pub title: String,
    pub chapters: Vec<Chapter>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("schema violation: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid ZIP archive: {0}")]
pub struct ZipError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{entry}: {error}")]
pub struct EntryError {
    pub entry: String,
    pub error: IngestError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArchiveContents {
    pub books: Vec<Book>,
    pub errors: Vec<EntryError>,
}

#[derive(Default)]
struct ChapterDraft {
    id: String,
    title: Option<String>,
    r#abstract: Option<String>,
    keywords: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    BookTitle,
    ChapterTitle,
    Abstract,
    Keyword,
}

fn attr(e: &BytesStart<'_>, key: &str) -> Result<Option<String>, IngestError> {
    let attr = e
        .try_get_attribute(key)
        .map_err(|err| IngestError::Xml(err.to_string()))?;
    attr.map(|a| {
        a.normalized_value(XmlVersion::Implicit1_0)
            .map(|v| v.trim().to_string())
            .map_err(|err| IngestError::Xml(err.to_string()))
    })
    .transpose()
}

fn required_attr(e: &BytesStart<'_>, key: &str, element: &str) -> Result<String, IngestError> {
    match attr(e, key)? {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(IngestError::Schema(format!("<{element}> is missing attribute '{key}'"))),
    }
}

struct BookDraft {
    volume: String,
    series: String,
    conf_series_id: Option<String>,
    year: Option<i32>,
    title: Option<String>,
    chapters: Vec<Chapter>,
    seen_ids: HashSet<String>,
}

impl BookDraft {
    fn from_start(e: &BytesStart<'_>) -> Result<Self, IngestError> {
        let year = match attr(e, "year")? {
            Some(y) if !y.is_empty() => Some(
                y.parse::<i32>()
                    .map_err(|_| IngestError::Schema(format!("year '{y}' is not an integer")))?,
            ),
            _ => None,
        };
        Ok(BookDraft {
            volume: required_attr(e, "volume", "book")?,
            series: required_attr(e, "series", "book")?,
            conf_series_id: attr(e, "conf-series-id")?.filter(|s| !s.is_empty()),
            year,
            title: None,
            chapters: Vec::new(),
            seen_ids: HashSet::new(),
        })
    }

    fn push_chapter(&mut self, draft: ChapterDraft) -> Result<(), IngestError> {
        let title = draft.title.filter(|t| !t.is_empty()).ok_or_else(|| {
            IngestError::Schema(format!("chapter '{}' has no title", draft.id))
        })?;
        if !self.seen_ids.insert(draft.id.clone()) {
            return Err(IngestError::Schema(format!("duplicate chapter id '{}'", draft.id)));
        }
        self.chapters.push(Chapter {
            chapter_id: draft.id,
            title,
            r#abstract: draft.r#abstract.unwrap_or_default(),
            keywords: draft.keywords,
        });
        Ok(())
    }
}

/// Parse one book document.
pub fn parse_book_xml(text: &str) -> Result<Book, IngestError> {
    let mut reader = Reader::from_str(text);
    let xml_err = |e: quick_xml::Error| IngestError::Xml(e.to_string());

    let mut stack: Vec<String> = Vec::new();
    let mut book: Option<BookDraft> = None;
    let mut finished: Option<BookDraft> = None;
    let mut chapter: Option<ChapterDraft> = None;
    let mut slot: Option<(Slot, usize)> = None;
    let mut buf = String::new();

    loop {
        let event = reader.read_event().map_err(|e| {
            IngestError::Xml(format!("{e} at byte {}", reader.error_position()))
        })?;
        match event {
            Event::Start(e) => {
                let name = e.local_name().as_ref().to_string();
                let parent = stack.last().map(String::as_str);
                match (parent, name.as_str()) {
                    (None, "book") => {
                        if finished.is_some() {
                            return Err(IngestError::Schema("more than one <book> element".into()));
                        }
                        book = Some(BookDraft::from_start(&e)?);
                    }
                    (None, other) => {
                        return Err(IngestError::Schema(format!("root element must be <book>, found <{other}>")));
                    }
                    (Some("book"), "title") => slot = Some((Slot::BookTitle, stack.len() + 1)),
                    (Some("book"), "chapter") => {
                        chapter = Some(ChapterDraft {
                            id: required_attr(&e, "id", "chapter")?,
                            ..Default::default()
                        });
                    }
                    (Some("chapter"), "title") => slot = Some((Slot::ChapterTitle, stack.len() + 1)),
                    (Some("chapter"), "abstract") => slot = Some((Slot::Abstract, stack.len() + 1)),
                    (Some("keywords"), "kw") => slot = Some((Slot::Keyword, stack.len() + 1)),
                    _ => {}
                }
                if slot.is_some_and(|(_, depth)| depth == stack.len() + 1) {
                    buf.clear();
                }
                stack.push(name);
            }
            Event::Empty(e) => {
                let name = e.local_name().as_ref().to_string();
                match (stack.last().map(String::as_str), name.as_str()) {
                    (None, "book") => {
                        return Err(IngestError::Schema("book has no chapters".into()));
                    }
                    (Some("book"), "chapter") => {
                        let id = required_attr(&e, "id", "chapter")?;
                        return Err(IngestError::Schema(format!("chapter '{id}' has no title")));
                    }
                    (Some("chapter"), "abstract") => {
                        if let Some(ch) = chapter.as_mut() {
                            ch.r#abstract = Some(String::new());
                        }
                    }
                    _ => {}
                }
            }
            Event::Text(e) => {
                if slot.is_some() {
                    buf.push_str(&e.xml10_content());
                }
            }
            Event::CData(e) => {
                if slot.is_some() {
                    buf.push_str(&e.xml10_content());
                }
            }
            Event::GeneralRef(e) => {
                if slot.is_some() {
                    if let Some(c) = e.resolve_char_ref().map_err(xml_err)? {
                        buf.push(c);
                    } else if let Some(s) = quick_xml::escape::resolve_predefined_entity(&e) {
                        buf.push_str(s);
                    } else {
                        return Err(IngestError::Xml(format!("unknown entity '&{};'", &*e)));
                    }
                }
            }
            Event::End(_) => {
                let depth = stack.len();
                let name = stack.pop().unwrap_or_default();
                if let Some((s, d)) = slot {
                    if d == depth {
                        slot = None;
                        let value = std::mem::take(&mut buf);
                        match s {
                            Slot::BookTitle => {
                                if let Some(b) = book.as_mut() {
                                    b.title = Some(collapse_whitespace(&value));
                                }
                            }
                            Slot::ChapterTitle => {
                                if let Some(ch) = chapter.as_mut() {
                                    ch.title = Some(collapse_whitespace(&value));
                                }
                            }
                            Slot::Abstract => {
                                if let Some(ch) = chapter.as_mut() {
                                    ch.r#abstract = Some(value.trim().to_string());
                                }
                            }
                            Slot::Keyword => {
                                let kw = collapse_whitespace(&value);
                                if let (Some(ch), false) = (chapter.as_mut(), kw.is_empty()) {
                                    ch.keywords.push(kw);
                                }
                            }
                        }
                    }
                }
                match (stack.last().map(String::as_str), name.as_str()) {
                    (Some("book"), "chapter") => {
                        if let (Some(b), Some(ch)) = (book.as_mut(), chapter.take()) {
                            b.push_chapter(ch)?;
                        }
                    }
                    (None, "book") => finished = book.take(),
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if let Some(open) = stack.last() {
        return Err(IngestError::Xml(format!("unexpected end of document inside <{open}>")));
    }
    let draft = finished.ok_or_else(|| IngestError::Schema("document has no <book> element".into()))?;
    let title = draft
        .title
        .filter(|t| !t.is_empty())
        .ok_or_else(|| IngestError::Schema("book has no title".into()))?;
    if draft.chapters.is_empty() {
        return Err(IngestError::Schema("book has no chapters".into()));
    }
    Ok(Book {
        volume_number: draft.volume,
        series_name: draft.series,
        conf_series_id: draft.conf_series_id,
        year: draft.year,
        title,
        chapters: draft.chapters,
    })
}

/// Parse every `.xml` entry of a ZIP archive. Entries are processed in archive-name
/// order; a bad entry is reported without aborting the others.
pub fn parse_archive(bytes: &[u8]) -> Result<ArchiveContents, ZipError> {
    let mut archive =
        zip::ZipArchive::new(Cursor::new(bytes)).map_err(|e| ZipError(e.to_string()))?;
    let mut entries: Vec<(String, Result<String, IngestError>)> = Vec::new();
    for i in 0..archive.len() {
        let mut file = archive.by_index(i).map_err(|e| ZipError(e.to_string()))?;
        let name = file.name().map_err(|e| ZipError(e.to_string()))?.to_string();
        if file.is_dir() || !name.to_ascii_lowercase().ends_with(".xml") {
            continue;
        }
        let mut raw = Vec::new();
        file.read_to_end(&mut raw).map_err(|e| ZipError(format!("{name}: {e}")))?;
        let text = String::from_utf8(raw)
            .map_err(|e| IngestError::Xml(format!("entry is not valid UTF-8: {e}")));
        entries.push((name, text));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    let parsed: Vec<(String, Result<Book, IngestError>)> = entries
        .into_par_iter()
        .map(|(name, text)| {
            let book = text.and_then(|t| parse_book_xml(&t));
            (name, book)
        })
        .collect();

    let mut out = ArchiveContents::default();
    for (entry, result) in parsed {
        match result {
            Ok(book) => out.books.push(book),
            Err(error) => out.errors.push(EntryError { entry, error }),
        }
    }
    Ok(out)
}

pub fn is_zip(bytes: &[u8]) -> bool {
    bytes.starts_with(b"PK\x03\x04") || bytes.starts_with(b"PK\x05\x06")
}

/// Accept either a ZIP archive or a single book XML document.
pub fn parse_upload(bytes: &[u8]) -> Result<ArchiveContents, ZipError> {
    if is_zip(bytes) {
        return parse_archive(bytes);
    }
    let result = std::str::from_utf8(bytes)
        .map_err(|e| IngestError::Xml(format!("document is not valid UTF-8: {e}")))
        .and_then(parse_book_xml);
    Ok(match result {
        Ok(book) => ArchiveContents { books: vec![book], errors: vec![] },
        Err(error) => ArchiveContents {
            books: vec![],
            errors: vec![EntryError { entry: "upload.xml".into(), error }],
        },
    })
}

/// Build a deflated ZIP from `(name, contents)` pairs.
pub fn write_archive<'a>(
    entries: impl IntoIterator<Item = (&'a str, &'a [u8])>,
) -> std::io::Result<Vec<u8>> {
    use std::io::Write;
    let mut writer = zip::ZipWriter::new(Cursor::new(Vec::new()));
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for (name, data) in entries {
        writer.start_file(name, options).map_err(std::io::Error::other)?;
        writer.write_all(data)?;
    }
    Ok(writer.finish().map_err(std::io::Error::other)?.into_inner())
}
