//! Instruction-prompt templates and fine-tuning dataset export. The
//! exported JSONL pairs are consumed by any external LLM trainer.

use std::collections::BTreeSet;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, LabelId, LabelVocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub instruction: String,
}

/// The two built-in instruction prompts.
pub fn builtin_templates() -> Vec<PromptTemplate> {
    vec![
        PromptTemplate {
            name: "p1".to_string(),
            instruction: "Identify all applicable legal categories for the following legal text:"
                .to_string(),
        },
        PromptTemplate {
            name: "p2".to_string(),
            instruction:
                "Categorize the following legal document with all relevant legal categories:"
                    .to_string(),
        },
    ]
}

pub fn template_by_name(name: &str) -> Result<PromptTemplate> {
    builtin_templates()
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| Error::Usage(format!("unknown template {name:?}, expected p1 or p2")))
}

/// Canonical label strings sorted ascending, joined by ", ". The empty set
/// renders as the empty string.
pub fn label_sequence(labels: &BTreeSet<LabelId>, vocab: &LabelVocabulary) -> Result<String> {
    let mut names = Vec::with_capacity(labels.len());
    for &id in labels {
        if id >= vocab.len() {
            return Err(Error::Config(format!("label id {id} out of vocabulary")));
        }
        names.push(vocab.label(id));
    }
    names.sort_unstable();
    Ok(names.join(", "))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinetuneExample {
    pub id: String,
    pub instruction: String,
    pub input: String,
    pub output: String,
}

/// Assemble one instruction/input/output triple for a document. The
/// document text is carried verbatim.
pub fn build_example(
    template: &PromptTemplate,
    doc: &Document,
    vocab: &LabelVocabulary,
) -> Result<FinetuneExample> {
    Ok(FinetuneExample {
        id: doc.id.clone(),
        instruction: template.instruction.clone(),
        input: doc.text.clone(),
        output: label_sequence(&doc.labels, vocab)?,
    })
}

/// Write one JSONL record per document in corpus order. Returns the number
/// of examples written.
pub fn export_finetune_dataset(
    corpus: &Corpus,
    template: &PromptTemplate,
    path: &Path,
) -> Result<usize> {
    let mut writer = BufWriter::new(std::fs::File::create(path)?);
    let mut written = 0;
    for doc in &corpus.documents {
        if doc.labels.is_empty() {
            log::warn!("document {:?} has no labels; exporting with empty output", doc.id);
        }
        let example = build_example(template, doc, &corpus.vocabulary)?;
        serde_json::to_writer(&mut writer, &example)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
        written += 1;
    }
    writer.flush()?;
    Ok(written)
}
