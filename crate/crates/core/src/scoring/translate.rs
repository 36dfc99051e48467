use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use super::ScoringError;

/// A machine translator used to carry context into the target language.
pub trait TranslateEndpoint: Send {
    /// Translates `texts` positionally into `target_lang`.
    fn translate(&mut self, texts: &[String], target_lang: &str) -> Result<Vec<String>, ScoringError>;
}

/// Stub translators for tests and offline runs.
#[derive(Debug, Clone, PartialEq)]
pub enum MapTranslator {
    Identity,
    Constant(String),
    Failing(String),
}

impl MapTranslator {
    pub fn identity() -> Self {
        MapTranslator::Identity
    }

    pub fn constant(text: impl Into<String>) -> Self {
        MapTranslator::Constant(text.into())
    }

    pub fn failing(message: impl Into<String>) -> Self {
        MapTranslator::Failing(message.into())
    }

    pub fn apply(&self, text: &str) -> String {
        match self {
            MapTranslator::Identity => text.to_string(),
            MapTranslator::Constant(c) => c.clone(),
            MapTranslator::Failing(_) => String::new(),
        }
    }
}

impl TranslateEndpoint for MapTranslator {
    fn translate(&mut self, texts: &[String], _target_lang: &str) -> Result<Vec<String>, ScoringError> {
        if let MapTranslator::Failing(msg) = self {
            return Err(ScoringError::Translator(msg.clone()));
        }
        Ok(texts.iter().map(|t| self.apply(t)).collect())
    }
}

/// Translator with an exact-text cache keyed by `(text, target language)`.
///
/// Reads go through a shared lock; upstream calls and cache writes are serialized.
pub struct CachedTranslator {
    endpoint: Mutex<Box<dyn TranslateEndpoint>>,
    cache: RwLock<HashMap<(String, String), String>>,
    upstream_calls: AtomicUsize,
    upstream_texts: AtomicUsize,
}

impl CachedTranslator {
    pub fn new(endpoint: Box<dyn TranslateEndpoint>) -> Self {
        CachedTranslator {
            endpoint: Mutex::new(endpoint),
            cache: RwLock::new(HashMap::new()),
            upstream_calls: AtomicUsize::new(0),
            upstream_texts: AtomicUsize::new(0),
        }
    }

    pub fn translate_batch(&self, texts: &[String], target_lang: &str) -> Result<Vec<String>, ScoringError> {
        let mut missing: Vec<String> = Vec::new();
        {
            let cache = self.cache.read().expect("translation cache poisoned");
            for t in texts {
                if !cache.contains_key(&(t.clone(), target_lang.to_string())) && !missing.contains(t) {
                    missing.push(t.clone());
                }
            }
        }
        if !missing.is_empty() {
            let mut endpoint = self.endpoint.lock().expect("translator poisoned");
            // another thread may have filled some entries meanwhile
            {
                let cache = self.cache.read().expect("translation cache poisoned");
                missing.retain(|t| !cache.contains_key(&(t.clone(), target_lang.to_string())));
            }
            if !missing.is_empty() {
                self.upstream_calls.fetch_add(1, Ordering::Relaxed);
                self.upstream_texts.fetch_add(missing.len(), Ordering::Relaxed);
                let out = endpoint.translate(&missing, target_lang)?;
                if out.len() != missing.len() {
                    return Err(ScoringError::EmptyTranslation(out.len().min(missing.len())));
                }
                let mut cache = self.cache.write().expect("translation cache poisoned");
                for (pos, (src, tgt)) in missing.into_iter().zip(out).enumerate() {
                    if tgt.trim().is_empty() {
                        return Err(ScoringError::EmptyTranslation(pos));
                    }
                    cache.insert((src, target_lang.to_string()), tgt);
                }
            }
        }
        let cache = self.cache.read().expect("translation cache poisoned");
        Ok(texts.iter().map(|t| cache[&(t.clone(), target_lang.to_string())].clone()).collect())
    }

    /// Number of upstream translate calls made so far.
    pub fn upstream_calls(&self) -> usize {
        self.upstream_calls.load(Ordering::Relaxed)
    }

    /// Number of texts sent upstream so far.
    pub fn upstream_texts(&self) -> usize {
        self.upstream_texts.load(Ordering::Relaxed)
    }
}

pub fn translate_batch(
    translator: &CachedTranslator,
    texts: &[String],
    target_lang: &str,
) -> Result<Vec<String>, ScoringError> {
    translator.translate_batch(texts, target_lang)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_stub() {
        let t = CachedTranslator::new(Box::new(MapTranslator::identity()));
        let texts = vec!["She wrote a book.".to_string(), "He did not.".to_string()];
        assert_eq!(translate_batch(&t, &texts, "it").unwrap(), texts);
    }

    #[test]
    fn repeated_text_hits_cache() {
        let t = CachedTranslator::new(Box::new(MapTranslator::constant("CTX")));
        translate_batch(&t, &["c".to_string()], "it").unwrap();
        translate_batch(&t, &["c".to_string(), "c".to_string()], "it").unwrap();
        assert_eq!(t.upstream_calls(), 1);
        assert_eq!(t.upstream_texts(), 1);
        // a different target language is a different cache key
        translate_batch(&t, &["c".to_string()], "de").unwrap();
        assert_eq!(t.upstream_calls(), 2);
    }

    #[test]
    fn empty_input() {
        let t = CachedTranslator::new(Box::new(MapTranslator::identity()));
        assert!(translate_batch(&t, &[], "it").unwrap().is_empty());
        assert_eq!(t.upstream_calls(), 0);
    }

    struct Blank;
    impl TranslateEndpoint for Blank {
        fn translate(&mut self, texts: &[String], _: &str) -> Result<Vec<String>, ScoringError> {
            Ok(texts.iter().enumerate().map(|(i, t)| if i == 1 { String::new() } else { t.clone() }).collect())
        }
    }

    #[test]
    fn empty_translation_names_position() {
        let t = CachedTranslator::new(Box::new(Blank));
        let err = translate_batch(&t, &["a".into(), "b".into()], "it").unwrap_err();
        assert!(matches!(err, ScoringError::EmptyTranslation(1)));
    }
}
