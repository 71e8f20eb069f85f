use crate::textalign::Token;

const STEPS: &[(&str, &str)] = &[
    ("loosen", "nut"),
    ("jack", "car"),
    ("remove", "wheel"),
    ("put", "wheel"),
    ("tighten", "nut"),
    ("lower", "car"),
    ("open", "hood"),
    ("check", "oil"),
    ("remove", "cap"),
    ("pour", "water"),
    ("add", "coffee"),
    ("press", "button"),
    ("fill", "tank"),
    ("insert", "plug"),
    ("close", "lid"),
    ("cut", "bread"),
    ("spread", "butter"),
    ("place", "pot"),
    ("stir", "mixture"),
    ("attach", "cable"),
    ("clamp", "hose"),
    ("sand", "board"),
    ("apply", "glue"),
    ("wipe", "surface"),
];

const DISTRACTORS: &[(&str, &str)] = &[
    ("show", "camera"),
    ("say", "hello"),
    ("like", "video"),
    ("subscribe", "channel"),
    ("grab", "drink"),
    ("take", "look"),
    ("get", "started"),
    ("see", "result"),
    ("read", "description"),
    ("thank", "viewer"),
    ("need", "help"),
    ("make", "sure"),
];

fn numbered(list: &[(&str, &str)], i: usize) -> Token {
    let (verb, object) = list[i % list.len()];
    let round = i / list.len();
    let object = if round == 0 {
        object.to_string()
    } else {
        format!("{object} {}", round + 1)
    };
    Token::new(verb, object).expect("word lists are non-empty")
}

/// Narration token of ground-truth step `i`.
pub fn step_token(i: usize) -> Token {
    numbered(STEPS, i)
}

/// The `i`-th off-script token; never equal to a step token.
pub fn distractor_token(i: usize) -> Token {
    numbered(DISTRACTORS, i)
}
