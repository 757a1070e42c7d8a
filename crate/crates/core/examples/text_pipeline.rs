//! Tokenize result titles and harvest candidate context terms.
//!
//!     cargo run --example text_pipeline

use presy::text::{self, AntiDictionaries, DEFAULT_CANDIDATE_CAP};

fn main() {
    let dictionaries = AntiDictionaries::builtin();
    let en = dictionaries.get("en").expect("english is built in");

    for token in text::segment("Query-Expansion, for Document Retrieval (2010)") {
        println!("{:>2} {}", token.position, token.surface);
    }

    let titles = [
        "Java programming for beginners",
        "The Java island: travel guide 2024",
        "Advanced programming in Java and the JVM",
        "A",
    ];
    let candidates = text::extract_candidates(&titles, &en, DEFAULT_CANDIDATE_CAP);
    println!("candidates: {}", candidates.join(", "));

    let fr = dictionaries.get("fr").expect("french is built in");
    let titres = ["Les bases de la programmation Java", "Le café de Java"];
    println!("candidats: {}", text::extract_candidates(&titres, &fr, 5).join(", "));
}
