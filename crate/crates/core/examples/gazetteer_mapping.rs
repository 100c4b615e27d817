//! Map country, religion, politics and slogan phrases to class tags.
//!
//!     cargo run --example gazetteer_mapping [-- "some text"]

use std::path::Path;

use propmap::gazetteer::{self, BuiltinList, EntityTag, Gazetteer};

fn main() -> propmap::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| {
        "This is not the America, this is not Iran or Riyadh this is Soviet Union.".into()
    });
    for list in BuiltinList::ALL {
        println!("{:<14} {:>4} entries", list.file_name(), list.entries().len());
    }

    let g = Gazetteer::builtin();
    let r = g.map_entities(&text);
    println!("\n{text}\n{}\n", r.text);
    print!("begin\tend\ttag\n{}", r.audit_tsv());

    // Only the NATION list, then a user list that also claims "Iran".
    let nation = Gazetteer::from_builtin(&[BuiltinList::Countries]);
    println!("\nNATION only: {}", nation.map_entities(&text).text);
    let mut entries = BuiltinList::Countries.entries();
    entries.extend(gazetteer::parse_list("Iran\nRiyadh\n", EntityTag::Politics, Path::new("user.txt"))?);
    let custom = Gazetteer::with_priority(entries, &[EntityTag::Politics, EntityTag::Nation])?;
    println!("user list, POLITICS first: {}", custom.map_entities(&text).text);
    Ok(())
}
