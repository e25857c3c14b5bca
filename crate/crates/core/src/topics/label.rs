use super::model::TopicModel;
use super::TopicError;
use crate::summarize::llm::{LlmClient, LlmRequest};

pub const LABEL_TOP_WORDS: usize = 10;

pub enum LabelMode<'a> {
    Manual(Vec<String>),
    Llm(&'a LlmClient),
}

pub fn label_prompt(words: &[&str]) -> String {
    format!(
        "Give a concise label (at most three words) for a topic whose most important words are: {}.",
        words.join(", ")
    )
}

pub fn label_topics(mut model: TopicModel, mode: LabelMode<'_>) -> Result<TopicModel, TopicError> {
    match mode {
        LabelMode::Manual(labels) => {
            if labels.len() != model.k {
                return Err(TopicError::LabelCountMismatch {
                    expected: model.k,
                    got: labels.len(),
                });
            }
            model.labels = labels;
        }
        LabelMode::Llm(client) => {
            let mut labels = Vec::with_capacity(model.k);
            for topic in 0..model.k {
                let words: Vec<String> = model
                    .top_terms(topic, LABEL_TOP_WORDS)
                    .into_iter()
                    .map(str::to_string)
                    .collect();
                let completion = client.complete(&LlmRequest::TopicLabel { topic, words })?;
                labels.push(completion.text);
            }
            model.labels = labels;
        }
    }
    Ok(model)
}
