use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use super::index::{idf, term_counts};
use super::{tokenize, CorpusIndex, Hit, RetrievalError, DEFAULT_TOP_K};
use crate::domain::{ActionId, Domain, World};

/// Something that can suggest the next action from a failure footprint.
pub trait Recommender: Send + Sync {
    fn recommend(&self, footprint: &str) -> Option<ActionId>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    /// Name of the recommended action schema.
    pub action: String,
    pub similarity: f64,
    pub supporting_posts: Vec<String>,
}

/// TF-IDF space over the documentation of every action schema.
#[derive(Debug, Clone)]
pub struct ActionMatcher {
    idf: BTreeMap<String, f64>,
    /// (schema name, weights, norm), sorted by schema name.
    docs: Vec<(String, BTreeMap<String, f64>, f64)>,
}

impl ActionMatcher {
    pub fn new(domain: &Domain) -> Self {
        let counts: Vec<(String, BTreeMap<String, u32>)> = domain
            .schemas
            .iter()
            .map(|s| (s.name.clone(), term_counts(tokenize(&s.doc))))
            .collect();
        let n = counts.len();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for (_, c) in &counts {
            for term in c.keys() {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
        }
        let idf: BTreeMap<String, f64> = df.into_iter().map(|(t, d)| (t, idf(n, d))).collect();
        let mut docs: Vec<(String, BTreeMap<String, f64>, f64)> = counts
            .into_iter()
            .map(|(name, c)| {
                let weights: BTreeMap<String, f64> = c
                    .into_iter()
                    .map(|(t, tf)| {
                        let w = tf as f64 * idf[&t];
                        (t, w)
                    })
                    .collect();
                let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
                (name, weights, norm)
            })
            .collect();
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        ActionMatcher { idf, docs }
    }

    /// Cosine similarity of the concatenated answers against each schema's
    /// documentation, as `(schema, similarity)` in schema-name order.
    pub fn similarities(&self, answers: &[&str]) -> Result<Vec<(String, f64)>, RetrievalError> {
        let texts: Vec<&str> = answers.iter().copied().filter(|a| !a.trim().is_empty()).collect();
        if texts.is_empty() {
            return Err(RetrievalError::NoAnswers);
        }
        let query: BTreeMap<String, f64> = term_counts(tokenize(&texts.join("\n")))
            .into_iter()
            .filter_map(|(t, tf)| self.idf.get(&t).map(|w| (t, tf as f64 * w)))
            .collect();
        let q_norm = query.values().map(|w| w * w).sum::<f64>().sqrt();
        Ok(self
            .docs
            .iter()
            .map(|(name, weights, norm)| {
                let dot: f64 = query
                    .iter()
                    .filter_map(|(t, wq)| weights.get(t).map(|wd| wq * wd))
                    .sum();
                let sim = if dot > 0.0 { dot / (q_norm * norm) } else { 0.0 };
                (name.clone(), sim)
            })
            .collect())
    }

    pub fn recommend(&self, answers: &[&str]) -> Result<Recommendation, RetrievalError> {
        let mut best: Option<(String, f64)> = None;
        // schema-name order, so a strict comparison keeps the first of any tie
        for (name, sim) in self.similarities(answers)? {
            if best.as_ref().is_none_or(|(_, b)| sim > *b) {
                best = Some((name, sim));
            }
        }
        match best {
            Some((action, similarity)) if similarity > 0.0 => Ok(Recommendation {
                action,
                similarity,
                supporting_posts: Vec::new(),
            }),
            _ => Err(RetrievalError::NoRecommendation),
        }
    }
}

/// Picks the schema whose documentation best matches the answers.
pub fn recommend_action(answers: &[&str], domain: &Domain) -> Result<Recommendation, RetrievalError> {
    ActionMatcher::new(domain).recommend(answers)
}

/// Full pipeline: footprint -> top posts -> accepted answers -> schema ->
/// grounded action.
pub struct DataDrivenRecommender {
    world: Arc<World>,
    index: Arc<CorpusIndex>,
    matcher: ActionMatcher,
    top_k: usize,
    cache: Mutex<HashMap<String, Option<ActionId>>>,
}

impl DataDrivenRecommender {
    pub fn new(world: Arc<World>, index: Arc<CorpusIndex>) -> Self {
        let matcher = ActionMatcher::new(world.domain());
        DataDrivenRecommender {
            world,
            index,
            matcher,
            top_k: DEFAULT_TOP_K,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Number of posts whose answers feed the match; clears the cache.
    pub fn with_top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self.cache.get_mut().expect("cache lock").clear();
        self
    }

    pub fn index(&self) -> &CorpusIndex {
        &self.index
    }

    /// Runs the pipeline and returns every intermediate result.
    pub fn explain(&self, footprint: &str) -> Result<(ActionId, Recommendation, Vec<Hit>), RetrievalError> {
        let hits = self.index.query(footprint, self.top_k)?;
        let answers: Vec<&str> = hits
            .iter()
            .filter_map(|h| self.index.post(h.doc).accepted_answer.as_deref())
            .collect();
        let mut rec = self.matcher.recommend(&answers)?;
        rec.supporting_posts = hits
            .iter()
            .map(|h| self.index.post(h.doc))
            .filter(|p| p.accepted_answer.as_deref().is_some_and(|a| !a.trim().is_empty()))
            .map(|p| p.id.clone())
            .collect();
        let action = self.ground(&rec.action, footprint)?;
        Ok((action, rec, hits))
    }

    /// Binds each parameter to an object of the right type named in the
    /// footprint, falling back to the first declared object of that type.
    pub fn ground(&self, schema_name: &str, footprint: &str) -> Result<ActionId, RetrievalError> {
        let domain = self.world.domain();
        let schema = domain
            .schema(schema_name)
            .ok_or_else(|| RetrievalError::Ungroundable(schema_name.to_string()))?;
        let mentioned: HashSet<String> = tokenize(footprint).into_iter().collect();
        let mut binding = Vec::with_capacity(schema.params.len());
        for (_, ty) in &schema.params {
            let candidates: Vec<&str> = domain.objects_of_type(ty).collect();
            let chosen = candidates
                .iter()
                .find(|o| {
                    let toks = tokenize(o);
                    !toks.is_empty() && toks.iter().all(|t| mentioned.contains(t))
                })
                .or(candidates.first())
                .ok_or_else(|| RetrievalError::Ungroundable(schema_name.to_string()))?;
            binding.push(*chosen);
        }
        self.world
            .action_id(&format!("{schema_name}({})", binding.join(",")))
            .map_err(|_| RetrievalError::Ungroundable(schema_name.to_string()))
    }
}

impl Recommender for DataDrivenRecommender {
    fn recommend(&self, footprint: &str) -> Option<ActionId> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(footprint) {
            return *hit;
        }
        let result = self.explain(footprint).ok().map(|(a, _, _)| a);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(footprint.to_string(), result);
        result
    }
}
