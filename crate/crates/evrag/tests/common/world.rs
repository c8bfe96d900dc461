//! The toy world behind the bundled fixtures: documents, questions, and the
//! facts the simulated agent treats as ground truth.

use evrag::io::DocumentRecord;
use evrag_core::{QaInstance, TaskForm};

pub struct Route {
    pub aspect: String,
    pub query: String,
    pub sub_queries: Vec<String>,
}

pub enum Answer {
    /// The evidence of one document.
    Doc(String),
    /// Evidence of several documents joined into a sentence.
    Join(Vec<String>),
}

pub struct Question {
    pub set: &'static str,
    pub qid: String,
    pub text: String,
    pub kind: TaskForm,
    pub gold: Vec<String>,
    pub sub_queries: Vec<String>,
    /// (aspect, doc_id) pairs that must be supported before answering.
    pub required: Vec<(String, String)>,
    /// doc_id -> evidence for documents this question counts as supportive.
    pub support: Vec<(String, String)>,
    pub context: Vec<String>,
    pub answer: Answer,
    /// Candidate reformulations per aspect, tried in order.
    pub routes: Vec<Route>,
}

pub struct World {
    pub docs: Vec<DocumentRecord>,
    pub questions: Vec<Question>,
    /// Answer strings a raw-text reader votes between.
    pub candidates: Vec<String>,
}

fn s(x: &str) -> String {
    x.to_owned()
}

fn v(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| s(x)).collect()
}

fn doc(id: &str, title: &str, text: &str) -> DocumentRecord {
    DocumentRecord {
        doc_id: s(id),
        title: s(title),
        text: s(text),
    }
}

fn route(aspect: &str, query: &str, subs: &[&str]) -> Route {
    Route {
        aspect: s(aspect),
        query: s(query),
        sub_queries: v(subs),
    }
}

fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
    xs.iter().map(|(a, b)| (s(a), s(b))).collect()
}

const FILLERS: [&str; 6] = [
    "The almanac notes that the winds of the northern coast are mild in the spring.",
    "The weather office reports light rain in the valleys and the hills for most of the week.",
    "The tide tables are printed in the back of the almanac for each month of the year.",
    "A map of the old post roads is kept in the reading room of the town hall.",
    "The county fair is held in the autumn and is known for its pie contest.",
    "The railway timetable lists the slow trains that stop at every halt in the district.",
];

const BROCHURE_LINES: [&str; 8] = [
    "Port Calder harbour lanterns glow nightly",
    "visitors praise Port Calder seafood stalls",
    "Port Calder ferries leave hourly",
    "fireworks light Port Calder quays every summer",
    "Port Calder boardwalk shops stay open late",
    "sailing races start from Port Calder pier",
    "Port Calder guesthouses offer sea views",
    "buskers fill Port Calder market square",
];

const CLUSTERS_A: [&str; 5] = ["Amberlin", "Brosk", "Cindral", "Dovemark", "Elsfeld"];
const CLUSTERS_B: [&str; 5] = ["Fennick", "Gorvale", "Hathra", "Istrel", "Jessamor"];

fn fixed_docs() -> Vec<DocumentRecord> {
    vec![
        // capital of Veloria
        doc("vel-1", "Veloria", "Veloria is a small coastal republic whose capital is Marisport, home to its parliament and supreme court."),
        doc("vel-2", "Veloria trade", "Most Velorian trade passes through the port of Marisport, the largest city in Veloria."),
        doc("vel-3", "Veloria climate", "Veloria has mild winters and dry summers along its southern shore."),
        // The Salt Crown
        doc("op-1", "The Salt Crown", "The Salt Crown is an opera in three acts composed by Oskar Lind and first performed in 1899."),
        doc("op-2", "Oskar Lind", "Oskar Lind was a composer best known for the opera The Salt Crown."),
        doc("op-3", "Opera season", "The city opera staged The Salt Crown and two comic operas last season."),
        // Brenmoor Bridge
        doc("br-1", "Brenmoor Bridge", "Construction of the Brenmoor Bridge began in 1869 and the bridge was completed in 1874."),
        doc("br-2", "Brenmoor", "Brenmoor is a market town whose bridge, finished in 1874, replaced a ferry crossing."),
        // Hana Ostrova
        doc("ho-1", "Hana Ostrova", "Hana Ostrova was a chemist who discovered the element ostrovium in 1912."),
        doc("ho-2", "Ostrovium", "Ostrovium is a rare metallic element named after the chemist who discovered it."),
        // Tomas Reyl -> Quendar -> Lorvish
        doc("tr-1", "Tomas Reyl", "Tomas Reyl was a painter born in the mountain town of Quendar."),
        doc("tr-2", "Reyl's landscapes", "The painter Tomas Reyl is known for landscapes of alpine lakes."),
        doc("qd-1", "Quendar", "Quendar is a mountain town where residents speak Lorvish."),
        doc("qd-2", "Lorvish language", "Lorvish is a language spoken in Quendar and nearby valleys."),
        // Kestrel Nine -> Ardent Optics -> Leona Falk
        doc("kn-1", "Kestrel Nine", "The Kestrel Nine is a folding camera made by Ardent Optics."),
        doc("ao-1", "Ardent Optics", "Ardent Optics was founded by Leona Falk in 1921."),
        doc("ao-2", "Leona Falk", "Leona Falk, an engineer, ran Ardent Optics for thirty years."),
        // The Glass Meridian -> Ilse Marrow -> Corven
        doc("gm-1", "The Glass Meridian", "The Glass Meridian is a novel written by Ilse Marrow and published in 1931."),
        doc("gm-2", "Marrow Observatory", "The Marrow Observatory, founded by Ilse Marrow, stands on a hill above the city of Corven."),
        doc("gm-3", "Glass Meridian reviews", "Critics praised the novel The Glass Meridian for its vivid harbour scenes."),
        doc("vp-1", "Velvet Players", "The Velvet Players are a touring company that staged a version of a popular book."),
        doc("vp-2", "Velvet Players tour", "The Velvet Players stage tour visited Sellhaven and Dunmere."),
        doc("vp-3", "Velvet Players costumes", "Costumes for the Velvet Players stage tour were sewn in Sellhaven."),
        doc("vp-4", "Velvet Players reviews", "Reviewers called the Velvet Players tour energetic but long."),
        // Halvard Conservatory -> Petra Sollen -> oboe
        doc("hc-1", "Halvard Conservatory", "The Halvard Conservatory was founded in 1884 by Petra Sollen."),
        doc("hc-2", "Petra Sollen", "Petra Sollen performed for decades as principal oboe of the court orchestra."),
        doc("hx-1", "Endowed campus", "The campus buildings endowed by patrons combine brick halls with an atrium."),
        doc("hx-2", "Campus architecture", "Architecture students study endowed campus buildings every spring."),
        doc("hx-3", "Campus library", "The endowed campus library is the oldest of its buildings."),
        // Ruben Achterberg -> Kelstad Rovers -> Brightwater Park
        doc("ra-1", "Ruben Achterberg", "Ruben Achterberg is head coach of the Kelstad Rovers football club."),
        doc("ra-2", "Achterberg early career", "Ruben Achterberg began his coaching career at Ironvale Arena youth camps."),
        doc("ra-3", "Achterberg profile", "As a player, Ruben Achterberg scored his first goal at Ironvale Arena."),
        doc("kr-1", "Kelstad Rovers", "Kelstad Rovers play their home matches at Brightwater Park."),
        doc("kr-2", "Kelstad Rovers cup run", "Kelstad Rovers lost the cup final at Ironvale Arena."),
        doc("kr-3", "Kelstad derby", "The Kelstad Rovers derby drew record crowds to Ironvale Arena."),
        // Winter Orchard -> Amara Oyelaran -> Calloway Prize
        doc("wo-1", "Winter Orchard", "Winter Orchard was translated into English by Amara Oyelaran."),
        doc("wo-2", "Winter Orchard reception", "Winter Orchard was shortlisted for the Ferrand Medal."),
        doc("ay-1", "Amara Oyelaran", "Amara Oyelaran received the Calloway Prize for translation in 2015."),
        doc("ay-2", "Oyelaran jury work", "Amara Oyelaran served on the jury of the Ferrand Medal."),
        doc("ay-3", "Oyelaran lectures", "Amara Oyelaran lectured on translation at the Ferrand Medal ceremony."),
        // Shakespeare
        doc("sh-1", "Shakespeare's works", "William Shakespeare wrote about 39 plays and 154 sonnets, and his writing added many words and phrases to the English language."),
        doc("sh-2", "Shakespeare and English drama", "Shakespeare's plays shaped the evolution of English drama through complex characters, blank verse and the blending of tragedy and comedy."),
        // Quill Island
        doc("qi-1", "Quill Island", "Quill Island is a small island known for its seabird colonies."),
        doc("qi-2", "Quill Island ferry", "Ferries to Quill Island run twice a week in summer."),
    ]
}

fn generated_docs() -> Vec<DocumentRecord> {
    let mut out = Vec::new();
    for (i, text) in FILLERS.iter().enumerate() {
        out.push(doc(&format!("aa-filler-{:02}", i + 1), "Almanac", text));
    }
    for i in 0..40 {
        let a = BROCHURE_LINES[i % BROCHURE_LINES.len()];
        let b = BROCHURE_LINES[(i * 3 + 1) % BROCHURE_LINES.len()];
        out.push(doc(
            &format!("zz-brochure-{:02}", i + 1),
            "Port Calder",
            &format!("{a}. {b}."),
        ));
    }
    for name in CLUSTERS_A.iter().chain(CLUSTERS_B.iter()) {
        for i in 1..=5 {
            out.push(doc(
                &cluster_doc(name, i),
                &format!("{name} tally {i}"),
                &format!("{name} tally entry {i} lists levies collected by {name} wardens."),
            ));
        }
    }
    out
}

fn cluster_doc(name: &str, i: usize) -> String {
    format!("cv-{}-{i}", name.to_lowercase())
}

/// A question that needs five tallies, one per iteration, where
/// `supportive[t]` documents of the t-th tally are supportive.
fn curve_question(qid: &str, text: &str, answer: &str, clusters: &[&str; 5], supportive: [usize; 5]) -> Question {
    let mut support = Vec::new();
    let mut context = Vec::new();
    let mut required = Vec::new();
    let mut routes = Vec::new();
    for (c, name) in clusters.iter().enumerate() {
        for i in 1..=5 {
            let id = cluster_doc(name, i);
            if i <= supportive[c] {
                support.push((id, format!("{name} tally {i}")));
            } else {
                context.push(id);
            }
        }
        let aspect = format!("levy recorded in the {name} tally");
        required.push((aspect.clone(), cluster_doc(name, 1)));
        if c > 0 {
            routes.push(Route {
                aspect,
                query: format!("What levy does the {name} tally record?"),
                sub_queries: vec![format!("{name} tally")],
            });
        }
    }
    let last = cluster_doc(clusters[4], 1);
    support.retain(|(id, _)| id != &last);
    support.push((last.clone(), s(answer)));
    Question {
        set: "curve",
        qid: s(qid),
        text: s(text),
        kind: TaskForm::MultiHop,
        gold: v(&[answer]),
        sub_queries: vec![format!("{} tally", clusters[0])],
        required,
        support,
        context,
        answer: Answer::Doc(last),
        routes,
    }
}

pub fn world() -> World {
    let mut docs = generated_docs();
    docs.extend(fixed_docs());

    let questions = vec![
        Question {
            set: "short",
            qid: s("s1"),
            text: s("What is the capital of Veloria?"),
            kind: TaskForm::ShortForm,
            gold: v(&["Marisport"]),
            sub_queries: v(&["Veloria capital"]),
            required: pairs(&[("capital of Veloria", "vel-1")]),
            support: pairs(&[("vel-1", "Marisport")]),
            context: v(&["vel-2", "vel-3"]),
            answer: Answer::Doc(s("vel-1")),
            routes: vec![],
        },
        Question {
            set: "short",
            qid: s("s2"),
            text: s("Who composed the opera The Salt Crown?"),
            kind: TaskForm::ShortForm,
            gold: v(&["Oskar Lind"]),
            sub_queries: v(&["Salt Crown opera composer"]),
            required: pairs(&[("composer of The Salt Crown", "op-1")]),
            support: pairs(&[("op-1", "Oskar Lind")]),
            context: v(&["op-2"]),
            answer: Answer::Doc(s("op-1")),
            routes: vec![],
        },
        Question {
            set: "short",
            qid: s("s3"),
            text: s("In what year was the Brenmoor Bridge completed?"),
            kind: TaskForm::ShortForm,
            gold: v(&["1874"]),
            sub_queries: v(&["Brenmoor Bridge completed"]),
            required: pairs(&[("completion year of the Brenmoor Bridge", "br-1")]),
            support: pairs(&[("br-1", "1874")]),
            context: v(&["br-2"]),
            answer: Answer::Doc(s("br-1")),
            routes: vec![],
        },
        Question {
            set: "short",
            qid: s("s4"),
            text: s("Which element did the chemist Hana Ostrova discover?"),
            kind: TaskForm::ShortForm,
            gold: v(&["ostrovium"]),
            sub_queries: v(&["Hana Ostrova element discovered"]),
            required: pairs(&[("element discovered by Hana Ostrova", "ho-1")]),
            support: pairs(&[("ho-1", "ostrovium")]),
            context: v(&["ho-2"]),
            answer: Answer::Doc(s("ho-1")),
            routes: vec![],
        },
        Question {
            set: "short",
            qid: s("s5"),
            text: s("What language is spoken in the birthplace of the painter Tomas Reyl?"),
            kind: TaskForm::ShortForm,
            gold: v(&["Lorvish"]),
            sub_queries: v(&["Tomas Reyl painter born"]),
            required: pairs(&[("birthplace of Tomas Reyl", "tr-1"), ("language spoken in Quendar", "qd-1")]),
            support: pairs(&[("tr-1", "Quendar"), ("qd-1", "Lorvish")]),
            context: v(&["tr-2", "qd-2"]),
            answer: Answer::Doc(s("qd-1")),
            routes: vec![route(
                "language spoken in Quendar",
                "What language do residents of Quendar speak?",
                &["Quendar residents language"],
            )],
        },
        Question {
            set: "short",
            qid: s("s6"),
            text: s("Who founded the company that makes the Kestrel Nine camera?"),
            kind: TaskForm::ShortForm,
            gold: v(&["Leona Falk"]),
            sub_queries: v(&["Kestrel Nine camera maker"]),
            required: pairs(&[("maker of the Kestrel Nine", "kn-1"), ("founder of Ardent Optics", "ao-1")]),
            support: pairs(&[("kn-1", "Ardent Optics"), ("ao-1", "Leona Falk")]),
            context: v(&["ao-2"]),
            answer: Answer::Doc(s("ao-1")),
            routes: vec![route("founder of Ardent Optics", "Who founded Ardent Optics?", &["Ardent Optics founded"])],
        },
        Question {
            set: "multihop",
            qid: s("m1"),
            text: s("Which city is home to the observatory founded by the author of The Glass Meridian?"),
            kind: TaskForm::MultiHop,
            gold: v(&["Corven"]),
            sub_queries: v(&["Glass Meridian novel author"]),
            required: pairs(&[
                ("author of The Glass Meridian", "gm-1"),
                ("observatory founded by Ilse Marrow", "gm-2"),
            ]),
            support: pairs(&[("gm-1", "Ilse Marrow"), ("gm-2", "Corven")]),
            context: v(&["gm-3"]),
            answer: Answer::Doc(s("gm-2")),
            routes: vec![
                route(
                    "observatory founded by Ilse Marrow",
                    "Which touring company staged a version of the novel by Ilse Marrow?",
                    &["Velvet Players stage tour"],
                ),
                route(
                    "observatory founded by Ilse Marrow",
                    "In which city is the observatory that Ilse Marrow founded?",
                    &["Ilse Marrow observatory founded"],
                ),
            ],
        },
        Question {
            set: "multihop",
            qid: s("m2"),
            text: s("Which instrument did the founder of the Halvard Conservatory play?"),
            kind: TaskForm::MultiHop,
            gold: v(&["oboe"]),
            sub_queries: v(&["Halvard Conservatory founded"]),
            required: pairs(&[
                ("founder of the Halvard Conservatory", "hc-1"),
                ("instrument played by Petra Sollen", "hc-2"),
            ]),
            support: pairs(&[("hc-1", "Petra Sollen"), ("hc-2", "oboe")]),
            context: vec![],
            answer: Answer::Doc(s("hc-2")),
            routes: vec![
                route(
                    "instrument played by Petra Sollen",
                    "Which campus buildings did Petra Sollen endow?",
                    &["endowed campus buildings"],
                ),
                route(
                    "instrument played by Petra Sollen",
                    "Which instrument did Petra Sollen perform on?",
                    &["Petra Sollen performed"],
                ),
            ],
        },
        Question {
            set: "multihop",
            qid: s("m3"),
            text: s("What is the home ground of the club coached by Ruben Achterberg?"),
            kind: TaskForm::MultiHop,
            gold: v(&["Brightwater Park"]),
            sub_queries: v(&["Ruben Achterberg coach club"]),
            required: pairs(&[
                ("club coached by Ruben Achterberg", "ra-1"),
                ("home ground of Kelstad Rovers", "kr-1"),
            ]),
            support: pairs(&[("ra-1", "Kelstad Rovers"), ("kr-1", "Brightwater Park")]),
            context: v(&["ra-2", "ra-3", "kr-2", "kr-3"]),
            answer: Answer::Doc(s("kr-1")),
            routes: vec![route(
                "home ground of Kelstad Rovers",
                "Where do the Kelstad Rovers play their home matches?",
                &["Kelstad Rovers home matches"],
            )],
        },
        Question {
            set: "multihop",
            qid: s("m4"),
            text: s("Which prize did the translator of Winter Orchard receive?"),
            kind: TaskForm::MultiHop,
            gold: v(&["Calloway Prize"]),
            sub_queries: v(&["Winter Orchard translated"]),
            required: pairs(&[
                ("translator of Winter Orchard", "wo-1"),
                ("prize received by Amara Oyelaran", "ay-1"),
            ]),
            support: pairs(&[("wo-1", "Amara Oyelaran"), ("ay-1", "Calloway Prize")]),
            context: v(&["wo-2", "ay-2", "ay-3"]),
            answer: Answer::Doc(s("ay-1")),
            routes: vec![route(
                "prize received by Amara Oyelaran",
                "Which prize did Amara Oyelaran receive?",
                &["Amara Oyelaran prize"],
            )],
        },
        Question {
            set: "longform",
            qid: s("l1"),
            text: s("What were William Shakespeare's major contributions to literature and his influence on the development of English drama?"),
            kind: TaskForm::LongForm,
            gold: v(&["Shakespeare wrote about 39 plays and 154 sonnets and enriched the English language with many new words and phrases; his complex characters, blank verse and blending of tragedy and comedy shaped the development of English drama."]),
            sub_queries: v(&[
                "What are the major literary contributions of William Shakespeare?",
                "How did William Shakespeare's works influence the evolution of English drama?",
            ]),
            required: pairs(&[("literary contributions", "sh-1"), ("influence on English drama", "sh-2")]),
            support: pairs(&[
                ("sh-1", "Shakespeare wrote about 39 plays and 154 sonnets, adding many words and phrases to the English language"),
                ("sh-2", "his complex characters, blank verse and blending of tragedy and comedy shaped the evolution of English drama"),
            ]),
            context: vec![],
            answer: Answer::Join(v(&["sh-1", "sh-2"])),
            routes: vec![],
        },
        curve_question(
            "c1",
            "Which district collected the highest levy according to the five district tallies?",
            "Elsfeld",
            &CLUSTERS_A,
            [1, 3, 3, 3, 3],
        ),
        curve_question(
            "c2",
            "Which district collected the lowest levy according to the five district tallies?",
            "Jessamor",
            &CLUSTERS_B,
            [2, 2, 2, 2, 2],
        ),
        Question {
            set: "demo",
            qid: s("d1"),
            text: s("Who designed the lighthouse on Quill Island?"),
            kind: TaskForm::ShortForm,
            gold: v(&["unknown"]),
            sub_queries: v(&["Quill Island lighthouse designer"]),
            required: pairs(&[("designer of the Quill Island lighthouse", "qi-lighthouse")]),
            support: vec![],
            context: v(&["qi-1", "qi-2"]),
            answer: Answer::Doc(s("qi-lighthouse")),
            routes: vec![
                route(
                    "designer of the Quill Island lighthouse",
                    "Which architect planned the Quill Island lighthouse?",
                    &["lighthouse architect"],
                ),
                route(
                    "designer of the Quill Island lighthouse",
                    "When was the Quill Island lighthouse built and by whom?",
                    &["lighthouse construction history"],
                ),
            ],
        },
    ];

    let candidates = v(&[
        "Marisport",
        "Oskar Lind",
        "1874",
        "ostrovium",
        "Lorvish",
        "Leona Falk",
        "Corven",
        "oboe",
        "Brightwater Park",
        "Calloway Prize",
        "Ironvale Arena",
        "Ferrand Medal",
        "Sellhaven",
        "Port Calder",
    ]);

    World {
        docs,
        questions,
        candidates,
    }
}

impl World {
    pub fn dataset(&self, set: &str) -> Vec<QaInstance> {
        self.questions
            .iter()
            .filter(|q| q.set == set)
            .map(|q| QaInstance {
                qid: q.qid.clone(),
                question: q.text.clone(),
                gold_answers: q.gold.clone(),
                task_kind: q.kind,
            })
            .collect()
    }
}
