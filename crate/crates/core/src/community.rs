//! Built-in community descriptions and answering guidelines.

const DESCRIPTIONS: &[(&str, &str)] = &[
    ("AskHistorians", "Users ask questions about history and receive detailed answers from knowledgeable historians."),
    ("NoStupidQuestions", "Users casually ask questions about general knowledge or any topic and receive answers."),
    ("AskEconomics", "Users ask questions about economic theory, research, and policy and receive answers grounded in economic theory and empirical research."),
    ("asklinguistics", "Users ask questions about linguistics and receive answers from knowledgeable linguists."),
    ("history", "Users discuss historical topics."),
    ("OutOfTheLoop", "Users ask questions about current events, pop culture, or internet trends they feel out of the loop on and receive answers."),
    ("ScienceBasedParenting", "Users ask questions about parenting and discuss research and science-based guidance."),
    ("beyondthebump", "Users discuss pregnancy, childbirth, and early parenting experiences."),
    ("explainlikeimfive", "Users ask questions about any topic and receive answers that simplify complex concepts in a way that is accessible for laypeople."),
];

const GUIDELINES: &[(&str, &str)] = &[
    ("AskHistorians", include_str!("../data/guidelines/AskHistorians.md")),
    ("ScienceBasedParenting", include_str!("../data/guidelines/ScienceBasedParenting.md")),
];

fn normalize(name: &str) -> String {
    name.trim().trim_start_matches("r/").to_ascii_lowercase()
}

fn lookup(table: &'static [(&'static str, &'static str)], name: &str) -> Option<&'static str> {
    let key = normalize(name);
    table
        .iter()
        .find(|(k, _)| k.to_ascii_lowercase() == key)
        .map(|(_, v)| *v)
}

/// Community names with a built-in description.
pub fn known_communities() -> impl Iterator<Item = &'static str> {
    DESCRIPTIONS.iter().map(|(k, _)| *k)
}

/// One-sentence description used as interpretation-generation context.
pub fn description(community: &str) -> Option<&'static str> {
    lookup(DESCRIPTIONS, community)
}

pub fn guidelines(community: &str) -> Option<&'static str> {
    lookup(GUIDELINES, community)
}

/// Description rephrased to follow "is a subreddit for ...".
pub fn explanation(community: &str) -> Option<String> {
    let d = description(community)?;
    let d = d.trim_end_matches('.');
    let d = d.strip_prefix("Users ").unwrap_or(d);
    Some(format!("users who {d}"))
}
