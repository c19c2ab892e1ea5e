//! Quality filters that narrow a community dump to information-seeking
//! questions with a workable number of answers.
//!
//! Title rules run in a fixed order and a post is charged to the first rule
//! it fails. Word lists are configuration; the defaults are seeded from the
//! examples the filtering procedure names.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawComment {
    #[serde(alias = "id")]
    pub comment_id: String,
    #[serde(default)]
    pub body: String,
    pub score: i64,
    /// `t3_` parents and absent parents mark top-level comments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
}

impl RawComment {
    pub fn is_top_level(&self) -> bool {
        self.parent_id.as_deref().is_none_or(|p| p.starts_with("t3_"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPost {
    #[serde(alias = "id")]
    pub post_id: String,
    #[serde(default)]
    pub title: String,
    pub score: i64,
    #[serde(default, alias = "created_utc")]
    pub created_at: i64,
    #[serde(alias = "subreddit")]
    pub community: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profanity_prob: Option<f64>,
    #[serde(default)]
    pub comments: Vec<RawComment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    EmptyTitle,
    LowScore,
    TooShort,
    NotInterrogative,
    RedditTerm,
    MultipleSentences,
    Profanity,
    FirstPerson,
    RelationshipTerm,
    DeixisFirstPerson,
    ValidationPhrase,
    TooFewComments,
    TooManyComments,
}

impl FilterRule {
    /// Title rules in evaluation order.
    pub const TITLE_RULES: [FilterRule; 11] = [
        FilterRule::EmptyTitle,
        FilterRule::LowScore,
        FilterRule::TooShort,
        FilterRule::NotInterrogative,
        FilterRule::RedditTerm,
        FilterRule::MultipleSentences,
        FilterRule::Profanity,
        FilterRule::FirstPerson,
        FilterRule::RelationshipTerm,
        FilterRule::DeixisFirstPerson,
        FilterRule::ValidationPhrase,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentBounds {
    pub min_comments: usize,
    pub max_comments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_title_tokens: usize,
    pub min_post_score: i64,
    pub min_comment_score: i64,
    pub profanity_threshold: f64,
    /// Keyed by community name, matched case-insensitively.
    pub comment_bounds: BTreeMap<String, CommentBounds>,
    /// Used for communities missing from `comment_bounds`.
    pub default_bounds: Option<CommentBounds>,
    pub wh_words: Vec<String>,
    /// Keep only titles with both a wh-word and a final question mark,
    /// instead of either.
    pub require_wh_and_question_mark: bool,
    /// Matched as word prefixes, so plurals and inflections are caught.
    pub reddit_terms: Vec<String>,
    pub first_person_singular: Vec<String>,
    pub first_person_plural: Vec<String>,
    pub deictic_terms: Vec<String>,
    pub relationship_terms: Vec<String>,
    pub validation_phrases: Vec<String>,
    /// Period-bearing tokens that do not end a sentence.
    pub abbreviations: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for FilterConfig {
    fn default() -> Self {
        let bounds = |min, max| CommentBounds {
            min_comments: min,
            max_comments: max,
        };
        let comment_bounds = [
            ("AskHistorians", bounds(5, 12)),
            ("history", bounds(5, 12)),
            ("OutOfTheLoop", bounds(5, 12)),
            ("beyondthebump", bounds(5, 12)),
            ("asklinguistics", bounds(5, 15)),
            ("explainlikeimfive", bounds(5, 15)),
            ("NoStupidQuestions", bounds(5, 18)),
            ("ScienceBasedParenting", bounds(4, 20)),
            ("AskEconomics", bounds(5, 30)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        FilterConfig {
            min_title_tokens: 4,
            min_post_score: 5,
            min_comment_score: 3,
            profanity_threshold: 0.8,
            comment_bounds,
            default_bounds: None,
            wh_words: strings(&["who", "what", "when", "where", "why", "which", "how"]),
            require_wh_and_question_mark: false,
            reddit_terms: strings(&["subreddit", "redditor", "upvote", "karma"]),
            first_person_singular: strings(&["i", "me", "my", "mine", "myself", "i'm", "i've", "i'd", "i'll", "im", "ive"]),
            first_person_plural: strings(&["we", "us", "our", "ours", "ourselves", "we're", "we've", "we'd", "we'll"]),
            deictic_terms: strings(&["here", "this", "these", "now", "today", "tonight", "yesterday", "currently", "recently"]),
            relationship_terms: strings(&[
                "my husband",
                "my wife",
                "husband",
                "wife",
                "boyfriend",
                "girlfriend",
                "fiance",
                "fiancee",
                "spouse",
                "in-laws",
                "mother-in-law",
                "father-in-law",
                "bf",
                "gf",
            ]),
            validation_phrases: strings(&[
                "is this normal",
                "does anyone else",
                "is this okay",
                "is this ok",
                "is it normal",
                "is it okay",
                "am i the only",
            ]),
            abbreviations: strings(&[
                "u.s.", "u.k.", "u.s.a.", "e.g.", "i.e.", "etc.", "vs.", "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.",
                "no.", "approx.", "ca.", "a.m.", "p.m.", "b.c.", "a.d.", "c.",
            ]),
        }
    }
}

impl FilterConfig {
    pub fn bounds_for(&self, community: &str) -> Result<CommentBounds, CorpusError> {
        let key = community.trim_start_matches("r/");
        self.comment_bounds
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, b)| *b)
            .or(self.default_bounds)
            .ok_or_else(|| CorpusError::UnknownCommunity(community.to_string()))
    }
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[a-z0-9]+(?:['-][a-z0-9]+)*").unwrap())
}

/// Lowercased words of a title.
fn words(title: &str) -> Vec<String> {
    let lowered = title.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
    word_re().find_iter(&lowered).map(|m| m.as_str().to_string()).collect()
}

fn has_phrase(joined: &str, phrase: &str) -> bool {
    let p = words(phrase).join(" ");
    !p.is_empty() && format!(" {joined} ").contains(&format!(" {p} "))
}

fn has_any(words: &[String], list: &[String]) -> bool {
    list.iter().any(|t| words.iter().any(|w| w == t))
}

/// Whether a title holds more than one sentence: a terminator followed by
/// more text, after abbreviations, initials, decimals and ellipses are
/// neutralized.
fn multiple_sentences(title: &str, abbreviations: &[String]) -> bool {
    static INITIAL: OnceLock<Regex> = OnceLock::new();
    static DECIMAL: OnceLock<Regex> = OnceLock::new();
    static ELLIPSIS: OnceLock<Regex> = OnceLock::new();
    static BREAK: OnceLock<Regex> = OnceLock::new();
    let mut t = format!(" {} ", title.to_lowercase());
    let mut abbr: Vec<&String> = abbreviations.iter().collect();
    abbr.sort_by_key(|a| std::cmp::Reverse(a.len()));
    for a in abbr {
        let a = a.to_lowercase();
        t = t.replace(&format!(" {a}"), &format!(" {}", a.replace('.', "")));
        t = t.replace(&format!("({a}"), &format!("({}", a.replace('.', "")));
    }
    let t = INITIAL
        .get_or_init(|| Regex::new(r"\b([a-z])\.").unwrap())
        .replace_all(&t, "$1");
    let t = DECIMAL.get_or_init(|| Regex::new(r"(\d)\.(\d)").unwrap()).replace_all(&t, "$1$2");
    let t = ELLIPSIS.get_or_init(|| Regex::new(r"\.{2,}|\u{2026}").unwrap()).replace_all(&t, " ");
    BREAK
        .get_or_init(|| Regex::new(r#"[.?!]+["')\]]*\s+\S"#).unwrap())
        .is_match(&t)
}

/// First title rule the post fails, if any.
pub fn check_post(post: &RawPost, config: &FilterConfig) -> Option<FilterRule> {
    let title = post.title.trim();
    if title.is_empty() {
        return Some(FilterRule::EmptyTitle);
    }
    if post.score < config.min_post_score {
        return Some(FilterRule::LowScore);
    }
    if title.split_whitespace().count() < config.min_title_tokens {
        return Some(FilterRule::TooShort);
    }
    let w = words(title);
    let joined = w.join(" ");
    let wh = has_any(&w, &config.wh_words);
    let qmark = title.ends_with('?');
    let interrogative = if config.require_wh_and_question_mark {
        wh && qmark
    } else {
        wh || qmark
    };
    if !interrogative {
        return Some(FilterRule::NotInterrogative);
    }
    if config
        .reddit_terms
        .iter()
        .any(|t| w.iter().any(|x| x.starts_with(t.as_str())))
    {
        return Some(FilterRule::RedditTerm);
    }
    if multiple_sentences(title, &config.abbreviations) {
        return Some(FilterRule::MultipleSentences);
    }
    if post.profanity_prob.is_some_and(|p| p > config.profanity_threshold) {
        return Some(FilterRule::Profanity);
    }
    if has_any(&w, &config.first_person_singular) {
        return Some(FilterRule::FirstPerson);
    }
    if config.relationship_terms.iter().any(|p| has_phrase(&joined, p)) {
        return Some(FilterRule::RelationshipTerm);
    }
    if has_any(&w, &config.first_person_plural) && has_any(&w, &config.deictic_terms) {
        return Some(FilterRule::DeixisFirstPerson);
    }
    if config.validation_phrases.iter().any(|p| has_phrase(&joined, p)) {
        return Some(FilterRule::ValidationPhrase);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: Vec<RawPost>,
    /// Rejections per rule; every rule that can fire is listed.
    pub tally: BTreeMap<FilterRule, usize>,
    /// Kept posts that had no profanity score.
    pub unscored: Vec<String>,
}

impl FilterReport {
    pub fn rejected(&self) -> usize {
        self.tally.values().sum()
    }
}

/// Applies the title rules in order; output keeps input order.
pub fn filter_posts(posts: &[RawPost], config: &FilterConfig) -> FilterReport {
    let mut tally: BTreeMap<FilterRule, usize> = FilterRule::TITLE_RULES.iter().map(|r| (*r, 0)).collect();
    let mut kept = Vec::new();
    let mut unscored = Vec::new();
    for post in posts {
        match check_post(post, config) {
            Some(rule) => *tally.entry(rule).or_default() += 1,
            None => {
                if post.profanity_prob.is_none() {
                    unscored.push(post.post_id.clone());
                }
                kept.push(post.clone());
            }
        }
    }
    FilterReport { kept, tally, unscored }
}

/// Keeps top-level comments scoring at least the minimum. Returns the
/// post with only those comments, or `Err(rule)` when the surviving count
/// falls outside the community's bounds.
pub fn filter_comments(post: &RawPost, config: &FilterConfig) -> Result<Result<RawPost, FilterRule>, CorpusError> {
    let bounds = config.bounds_for(&post.community)?;
    let comments: Vec<RawComment> = post
        .comments
        .iter()
        .filter(|c| c.is_top_level() && c.score >= config.min_comment_score)
        .cloned()
        .collect();
    Ok(if comments.len() < bounds.min_comments {
        Err(FilterRule::TooFewComments)
    } else if comments.len() > bounds.max_comments {
        Err(FilterRule::TooManyComments)
    } else {
        Ok(RawPost {
            comments,
            ..post.clone()
        })
    })
}

/// Title rules followed by comment rules, tallied together.
pub fn filter_corpus(posts: &[RawPost], config: &FilterConfig) -> Result<FilterReport, CorpusError> {
    let mut report = filter_posts(posts, config);
    report.tally.insert(FilterRule::TooFewComments, 0);
    report.tally.insert(FilterRule::TooManyComments, 0);
    let mut kept = Vec::with_capacity(report.kept.len());
    for post in &report.kept {
        match filter_comments(post, config)? {
            Ok(p) => kept.push(p),
            Err(rule) => *report.tally.entry(rule).or_default() += 1,
        }
    }
    let ids: std::collections::HashSet<&str> = kept.iter().map(|p| p.post_id.as_str()).collect();
    report.unscored.retain(|id| ids.contains(id.as_str()));
    report.kept = kept;
    Ok(report)
}
