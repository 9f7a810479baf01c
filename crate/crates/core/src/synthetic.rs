//! Seeded synthetic film-industry graphs for tests and benchmarks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Entity, PropertyGraph, Relation};
use crate::schema::{Cardinality, Characteristics, EntitySchema, GraphSchema, Participation, PropertySchema, RelationSchema};
use crate::value::{Datatype, Date, PropertyValue};

fn props(list: &[(&str, Datatype)]) -> Vec<PropertySchema> {
    list.iter().map(|(n, d)| PropertySchema::new(*n, *d)).collect()
}

fn rel(label: &str, subj: &str, obj: &str, cardinality: Cardinality) -> RelationSchema {
    RelationSchema {
        label: label.into(),
        subj_label: subj.into(),
        obj_label: obj.into(),
        properties: Vec::new(),
        time_sensitive: false,
        characteristics: Characteristics {
            cardinality,
            ..Characteristics::default()
        },
    }
}

/// Schema of [`film_world`].
pub fn film_schema() -> GraphSchema {
    use Datatype::*;
    let entities = alloc::vec![
        EntitySchema {
            label: "Person".into(),
            properties: props(&[("name", Str), ("birth_date", Date), ("height", Float), ("aliases", ListStr)]),
        },
        EntitySchema {
            label: "Movie".into(),
            properties: props(&[("name", Str), ("release_year", Int), ("duration", Float), ("genres", ListStr), ("rating", Str)]),
        },
        EntitySchema {
            label: "Company".into(),
            properties: props(&[("name", Str), ("founded_year", Int)]),
        },
        EntitySchema {
            label: "Country".into(),
            properties: props(&[("name", Str), ("population", Int)]),
        },
        EntitySchema {
            label: "Award".into(),
            properties: props(&[("name", Str)]),
        },
    ];
    let mut citizen = rel("citizenOf", "Person", "Country", Cardinality::ManyOne);
    citizen.characteristics.subj_participation = Participation::Total;
    let mut located = rel("locatedIn", "Company", "Country", Cardinality::ManyOne);
    located.characteristics.subj_participation = Participation::Total;
    let mut starred = rel("starredIn", "Person", "Movie", Cardinality::ManyMany);
    starred.characteristics.entails = alloc::vec!["actedIn".into()];
    let mut won = rel("won", "Person", "Award", Cardinality::ManyMany);
    won.characteristics.entails = alloc::vec!["nominatedFor".into()];
    let mut employed = rel("employedBy", "Person", "Company", Cardinality::ManyMany);
    employed.time_sensitive = true;
    employed.properties = props(&[("start_year", Int), ("end_year", Int)]);
    let relations = alloc::vec![
        rel("directedBy", "Movie", "Person", Cardinality::ManyOne),
        rel("actedIn", "Person", "Movie", Cardinality::ManyMany),
        starred,
        rel("producedBy", "Movie", "Company", Cardinality::ManyMany),
        citizen,
        located,
        rel("nominatedFor", "Person", "Award", Cardinality::ManyMany),
        won,
        employed,
        rel("marriedTo", "Person", "Person", Cardinality::OneOne),
        rel("founded", "Person", "Company", Cardinality::ManyMany),
    ];
    GraphSchema {
        name: "films".into(),
        entities,
        relations,
    }
    .normalize()
    .expect("film schema is consistent")
}

const FIRST: [&str; 16] = [
    "Ada", "Bruno", "Chiara", "Dmitri", "Elena", "Farid", "Greta", "Hiro", "Ines", "Jonas", "Kaia", "Luca", "Mara",
    "Nils", "Omar", "Priya",
];
const LAST: [&str; 12] = [
    "Adler", "Berg", "Castro", "Dahl", "Evans", "Fischer", "Gomez", "Hale", "Ivanova", "Jensen", "Kato", "Lund",
];
const WORDS: [&str; 14] = [
    "Silent", "River", "Glass", "Northern", "Echo", "Harbor", "Crimson", "Winter", "Paper", "Garden", "Iron",
    "Distant", "Moon", "Letters",
];
const GENRES: [&str; 6] = ["drama", "comedy", "thriller", "documentary", "romance", "animation"];
const RATINGS: [&str; 4] = ["G", "PG", "PG-13", "R"];

fn person_name(i: usize) -> String {
    let base = format!("{} {}", FIRST[i % FIRST.len()], LAST[(i / FIRST.len()) % LAST.len()]);
    match i / (FIRST.len() * LAST.len()) {
        0 => base,
        k => format!("{base} {}", k + 1),
    }
}

fn movie_name(i: usize) -> String {
    let a = WORDS[i % WORDS.len()];
    let b = WORDS[(i / WORDS.len() + 3) % WORDS.len()];
    match i / (WORDS.len() * WORDS.len()) {
        0 => format!("The {a} {b}"),
        k => format!("The {a} {b} {}", k + 1),
    }
}

/// A random film-industry graph with roughly `movies` films. The same seed and
/// size always give the same graph. About one in ten optional properties is
/// left unset.
pub fn film_world(seed: u64, movies: usize) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let movies = movies.max(2);
    let people = movies * 2;
    let companies = (movies / 4).max(2);
    let countries = (movies / 8).clamp(2, 20);
    let awards = (movies / 6).max(2);
    let mut ents = Vec::new();
    let mut rels = Vec::new();
    let some = |rng: &mut ChaCha8Rng| rng.gen_bool(0.9);
    for i in 0..countries {
        let mut e = Entity::new(format!("C{i}"), "Country", format!("{}land {i}", WORDS[i % WORDS.len()]));
        if some(&mut rng) {
            e = e.with("population", rng.gen_range(100_000i64..90_000_000));
        }
        ents.push(e);
    }
    for i in 0..companies {
        let mut e = Entity::new(format!("K{i}"), "Company", format!("{} Pictures {i}", WORDS[i % WORDS.len()]));
        if some(&mut rng) {
            e = e.with("founded_year", rng.gen_range(1900i64..2015));
        }
        ents.push(e);
        rels.push(Relation::new(format!("loc{i}"), "locatedIn", format!("K{i}"), format!("C{}", rng.gen_range(0..countries))));
    }
    for i in 0..awards {
        let name = match i / WORDS.len() {
            0 => format!("{} Prize", WORDS[i]),
            k => format!("{} Prize {}", WORDS[i % WORDS.len()], k + 1),
        };
        ents.push(Entity::new(format!("A{i}"), "Award", name));
    }
    for i in 0..people {
        let mut e = Entity::new(format!("P{i}"), "Person", person_name(i));
        if some(&mut rng) {
            let d = Date::new(rng.gen_range(1920..2000), rng.gen_range(1..=12), rng.gen_range(1..=28)).expect("valid day");
            e = e.with("birth_date", d);
        }
        if some(&mut rng) {
            e = e.with("height", libm::round(rng.gen_range(150.0..200.0f64) * 10.0) / 10.0);
        }
        if rng.gen_bool(0.3) {
            let n = rng.gen_range(1..=2);
            let aliases: Vec<String> = (0..n).map(|k| format!("{} {}", LAST[(i + k) % LAST.len()], k + 1)).collect();
            e = e.with("aliases", PropertyValue::ListText(aliases));
        }
        ents.push(e);
        if rng.gen_bool(0.95) {
            rels.push(Relation::new(format!("cit{i}"), "citizenOf", format!("P{i}"), format!("C{}", rng.gen_range(0..countries))));
        }
        let founded = rng.gen_bool(0.1).then(|| rng.gen_range(0..companies));
        if let Some(k) = founded {
            rels.push(Relation::new(format!("fnd{i}"), "founded", format!("P{i}"), format!("K{k}")));
        }
        if rng.gen_bool(0.5) {
            let start = rng.gen_range(1960i64..2015);
            let k = match founded {
                Some(k) if rng.gen_bool(0.6) => k,
                _ => rng.gen_range(0..companies),
            };
            let mut r = Relation::new(format!("emp{i}"), "employedBy", format!("P{i}"), format!("K{k}"))
                .with("start_year", start);
            if rng.gen_bool(0.7) {
                r = r.with("end_year", start + rng.gen_range(0i64..15));
            }
            rels.push(r);
        }
        for k in 0..rng.gen_range(0..3usize) {
            let a = rng.gen_range(0..awards);
            rels.push(Relation::new(format!("nom{i}_{k}"), "nominatedFor", format!("P{i}"), format!("A{a}")));
            if rng.gen_bool(0.4) {
                rels.push(Relation::new(format!("won{i}_{k}"), "won", format!("P{i}"), format!("A{a}")));
            }
        }
    }
    let mut married: BTreeSet<usize> = BTreeSet::new();
    for i in 0..people / 6 {
        let (a, b) = (rng.gen_range(0..people), rng.gen_range(0..people));
        if a != b && !married.contains(&a) && !married.contains(&b) {
            married.insert(a);
            married.insert(b);
            rels.push(Relation::new(format!("mar{i}"), "marriedTo", format!("P{a}"), format!("P{b}")));
        }
    }
    for i in 0..movies {
        let mut e = Entity::new(format!("M{i}"), "Movie", movie_name(i));
        if some(&mut rng) {
            e = e.with("release_year", rng.gen_range(1950i64..2024));
        }
        if some(&mut rng) {
            e = e.with("duration", rng.gen_range(70i64..200) as f64 + 0.5 * rng.gen_range(0..2) as f64);
        }
        if some(&mut rng) {
            let k = rng.gen_range(1..=2);
            let mut g: Vec<&str> = GENRES.choose_multiple(&mut rng, k).copied().collect();
            g.sort_unstable();
            e = e.with("genres", PropertyValue::ListText(g.into_iter().map(String::from).collect()));
        }
        if some(&mut rng) {
            e = e.with("rating", *RATINGS.choose(&mut rng).expect("non-empty"));
        }
        ents.push(e);
        let director = rng.gen_range(0..people);
        rels.push(Relation::new(format!("dir{i}"), "directedBy", format!("M{i}"), format!("P{director}")));
        let mut cast: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..people)).collect();
        if rng.gen_bool(0.3) {
            cast.push(director);
        }
        cast.sort_unstable();
        cast.dedup();
        for (k, p) in cast.iter().enumerate() {
            rels.push(Relation::new(format!("act{i}_{k}"), "actedIn", format!("P{p}"), format!("M{i}")));
            if k == 0 {
                rels.push(Relation::new(format!("star{i}"), "starredIn", format!("P{p}"), format!("M{i}")));
            }
        }
        for k in 0..rng.gen_range(1..3usize) {
            rels.push(Relation::new(format!("prod{i}_{k}"), "producedBy", format!("M{i}"), format!("K{}", rng.gen_range(0..companies))));
        }
    }
    PropertyGraph::assemble(film_schema(), ents, rels).expect("synthetic graph is well formed")
}
