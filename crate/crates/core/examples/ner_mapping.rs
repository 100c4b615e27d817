//! Replace named-entity spans with their type, from an entity file or the
//! built-in capitalized-run heuristic.
//!
//!     cargo run --example ner_mapping

use propmap::gazetteer::Gazetteer;
use propmap::nermap;

fn main() -> propmap::Result<()> {
    let text = "Yesterday Mr. John Smith met Angela Merkel in Berlin. The Senate voted.";
    let jsonl = r#"{"doc_key":"42","begin":14,"end":24,"type":"PERSON"}
{"doc_key":"42","begin":29,"end":42,"type":"PERSON"}
{"doc_key":"42","begin":46,"end":52,"type":"GPE"}
{"doc_key":"42","begin":58,"end":64,"type":"ORG"}
"#;
    let entities = nermap::parse_entities_str(jsonl, "inline")?;
    println!("{text}");
    let person = nermap::apply_person_tags(text, &entities, &nermap::person_types())?;
    println!("PERSON only:      {}", person.text);
    let various = nermap::apply_person_tags(text, &entities, &nermap::various_entity_types())?;
    println!("various entities: {}", various.text);

    let guessed = nermap::heuristic_person_tagger(text, "42", Some(&Gazetteer::builtin()));
    for a in &guessed {
        let span: String = text.chars().skip(a.begin).take(a.end - a.begin).collect();
        println!("heuristic {}: [{}, {}) {span:?}", a.entity_type, a.begin, a.end);
    }
    let heur = nermap::apply_person_tags(text, &guessed, &nermap::person_types())?;
    println!("heuristic:        {}", heur.text);
    Ok(())
}
