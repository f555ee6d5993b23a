//! Seeded synthetic data: Gaussian blobs for numeric tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed_store::EmbeddingMatrix;
use crate::error::Result;

/// Standard normal draw via Box–Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `n_blobs` unit-variance blobs of `per_blob` points in `dims` dimensions.
/// Blob `c` is centered at `separation` along axis `c` (mod dims). Returns the
/// matrix and the true blob index of every row.
pub fn gaussian_blobs(
    n_blobs: usize,
    per_blob: usize,
    dims: usize,
    separation: f64,
    seed: u64,
) -> Result<(EmbeddingMatrix<f64>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_blobs * per_blob);
    let mut truth = Vec::with_capacity(n_blobs * per_blob);
    for c in 0..n_blobs {
        for _ in 0..per_blob {
            let mut r: Vec<f64> = (0..dims).map(|_| normal(&mut rng)).collect();
            r[c % dims] += separation;
            rows.push(r);
            truth.push(c);
        }
    }
    Ok((EmbeddingMatrix::from_rows(&rows)?, truth))
}

/// Names of the planted themes; segment doc ids start with the theme name.
pub const THEMES: [&str; 4] = ["frode", "lavoro", "famiglia", "tributi"];

const THEME_WORDS: [&[&str]; 4] = [
    &[
        "frode", "informatica", "accesso", "abusivo", "sistema", "credenziali", "phishing", "bonifico", "conto",
        "corrente", "truffa", "profitto", "password", "banca", "telematico", "dati", "furto", "identità",
        "digitale", "carta",
    ],
    &[
        "licenziamento", "lavoratore", "datore", "giusta", "contratto", "retribuzione", "reintegrazione",
        "mansioni", "dipendente", "indennità", "orario", "straordinario", "sindacale", "disciplinare", "preavviso",
        "demansionamento", "subordinato", "mobbing", "ferie", "tfr",
    ],
    &[
        "separazione", "divorzio", "coniuge", "assegno", "mantenimento", "figli", "minori", "affidamento",
        "condiviso", "casa", "coniugale", "genitore", "matrimonio", "responsabilità", "genitoriale",
        "collocamento", "visita", "alimenti", "convivenza", "addebito",
    ],
    &[
        "imposta", "accertamento", "tributario", "iva", "reddito", "contribuente", "cartella", "esattoriale",
        "agenzia", "entrate", "sanzioni", "evasione", "fatture", "detrazione", "dichiarazione", "redditi",
        "riscossione", "erariale", "fiscale", "avviso",
    ],
];

const SHARED_WORDS: &[&str] = &[
    "danno", "termine", "obbligo", "giudizio", "prova", "domanda", "diritto", "istanza", "atto", "onere",
];

const FUNCTION_WORDS: &[&str] = &["il", "la", "di", "che", "per", "con", "del", "nella", "e", "non", "alla", "dei"];

const PLACEHOLDERS: &[&str] = &["<PERSONA>", "<LOCALITÀ>", "<DATA>", "<ORGANIZAZZIONE>"];

/// Embedding width of the synthetic corpus.
pub const SYNTHETIC_DIMS: usize = 64;

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub segments: Vec<crate::corpus::Segment>,
    pub embeddings: EmbeddingMatrix<f32>,
    /// Planted theme index of every segment.
    pub themes: Vec<usize>,
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dims: usize, scale: f64) -> Vec<f64> {
    let s = scale / (dims as f64).sqrt();
    (0..dims).map(|_| normal(rng) * s).collect()
}

/// `per_theme` segments for each of the four themes, interleaved by theme.
///
/// Text mixes theme words, a shared legal vocabulary, function words and
/// anonymization placeholders. Each word has a fixed vector (theme words sit
/// near their theme center); a segment's embedding is the mean of its word
/// vectors plus small noise.
pub fn synthetic_corpus(per_theme: usize, seed: u64) -> Result<SyntheticCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = SYNTHETIC_DIMS;
    let centers: Vec<Vec<f64>> = (0..THEMES.len()).map(|_| gaussian_vec(&mut rng, dims, 1.0)).collect();
    let mut vectors: std::collections::HashMap<&str, Vec<f64>> = std::collections::HashMap::new();
    for (t, words) in THEME_WORDS.iter().enumerate() {
        for w in words.iter() {
            let noise = gaussian_vec(&mut rng, dims, 0.5);
            vectors.insert(w, centers[t].iter().zip(&noise).map(|(c, n)| c + n).collect());
        }
    }
    for w in SHARED_WORDS.iter().chain(FUNCTION_WORDS) {
        vectors.insert(w, gaussian_vec(&mut rng, dims, 1.0));
    }

    let mut segments = Vec::with_capacity(per_theme * THEMES.len());
    let mut themes = Vec::with_capacity(per_theme * THEMES.len());
    let mut rows = Vec::with_capacity(per_theme * THEMES.len());
    for i in 0..per_theme * THEMES.len() {
        let t = i % THEMES.len();
        let nth = i / THEMES.len();
        let n_words = rng.random_range(15..=30);
        let mut words: Vec<&str> = Vec::with_capacity(n_words);
        let mut acc = vec![0.0; dims];
        let mut n_vec = 0usize;
        for _ in 0..n_words {
            let r: f64 = rng.random();
            let w = if r < 0.62 {
                THEME_WORDS[t][rng.random_range(0..THEME_WORDS[t].len())]
            } else if r < 0.77 {
                SHARED_WORDS[rng.random_range(0..SHARED_WORDS.len())]
            } else if r < 0.97 {
                FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())]
            } else {
                PLACEHOLDERS[rng.random_range(0..PLACEHOLDERS.len())]
            };
            if let Some(v) = vectors.get(w) {
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
                n_vec += 1;
            }
            words.push(w);
        }
        let mut text = words.join(" ");
        if let Some(first) = text.get(0..1) {
            text.replace_range(0..1, &first.to_uppercase());
        }
        text.push('.');
        let noise = gaussian_vec(&mut rng, dims, 0.05);
        rows.push(
            acc.iter()
                .zip(&noise)
                .map(|(a, n)| (a / n_vec.max(1) as f64 + n) as f32)
                .collect::<Vec<f32>>(),
        );
        let doc = format!("{}_{:02}", THEMES[t], nth / 5);
        segments.push(crate::corpus::Segment::new(&doc, 1 + (nth % 5) as u32 / 2, nth % 5, text));
        themes.push(t);
    }
    let ids = segments.iter().map(|s| s.segment_id.clone()).collect();
    let data = rows.into_iter().flatten().collect();
    let embeddings = EmbeddingMatrix::new(segments.len(), dims, data, ids)?;
    Ok(SyntheticCorpus {
        segments,
        embeddings,
        themes,
    })
}

/// Planted theme of a segment, read from its doc id prefix.
pub fn theme_of(doc_id: &str) -> Option<usize> {
    THEMES.iter().position(|t| doc_id.split('_').next() == Some(*t))
}

/// Fraction of clustered rows whose planted theme equals their cluster's
/// majority theme. Noise rows are ignored; `None` when everything is noise.
pub fn purity(labels: &[i64], truth: &[usize]) -> Option<f64> {
    let mut counts: std::collections::BTreeMap<i64, std::collections::BTreeMap<usize, usize>> = Default::default();
    for (&l, &t) in labels.iter().zip(truth) {
        if l >= 0 {
            *counts.entry(l).or_default().entry(t).or_insert(0) += 1;
        }
    }
    let total: usize = counts.values().flat_map(|m| m.values()).sum();
    let majority: usize = counts.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    (total > 0).then(|| majority as f64 / total as f64)
}

const PERSONS: &[&str] = &["Mario Rossi", "Giulia Bianchi", "Luca Esposito", "Anna Ferrari", "Marco Romano", "Chiara Colombo"];
const PLACES: &[&str] = &["Milano", "Napoli", "Torino", "Bologna", "Palermo", "Firenze"];
const ORGS: &[&str] = &["Alfa Costruzioni S.r.l.", "Banca Popolare Sud", "Studio Legale Verdi", "Beta Servizi S.p.A."];
const EMAILS: &[&str] = &["mario.rossi@pec.it", "g.bianchi@legalmail.it", "info@alfacostruzioni.it"];
const DATES: &[&str] = &["12/03/2019", "5 maggio 2020", "28.11.2017", "1 luglio 2021"];
const IDS: &[&str] = &["RSSMRA80A01F205X", "BNCGLI85M41H501Y", "FRRNNA70C45L219Z"];

/// Segments with gold entity spans (score 0.9) at character offsets.
pub fn anonymization_fixture(n: usize, seed: u64) -> Result<(Vec<crate::corpus::Segment>, Vec<crate::anonymize::EntitySpan>)> {
    use crate::anonymize::{EntityLabel, EntitySpan};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates: &[&[(Option<EntityLabel>, &str)]] = &[
        &[(None, "Il ricorrente "), (Some(EntityLabel::Person), ""), (None, ", residente a "), (Some(EntityLabel::Location), ""), (None, ", ha proposto appello.")],
        &[(None, "La società "), (Some(EntityLabel::Organization), ""), (None, " ha notificato l'atto in data "), (Some(EntityLabel::Date), ""), (None, ".")],
        &[(None, "Comunicazioni all'indirizzo "), (Some(EntityLabel::Email), ""), (None, " del difensore di "), (Some(EntityLabel::Person), ""), (None, ".")],
        &[(None, "Codice fiscale "), (Some(EntityLabel::Id), ""), (None, ", nato a "), (Some(EntityLabel::Location), ""), (None, " il "), (Some(EntityLabel::Date), ""), (None, ".")],
        &[(None, "Il giudice ha accolto la domanda proposta contro "), (Some(EntityLabel::Organization), ""), (None, ".")],
    ];
    let mut segments = Vec::with_capacity(n);
    let mut spans = Vec::new();
    for i in 0..n {
        let tpl = templates[rng.random_range(0..templates.len())];
        let mut text = String::new();
        let id = crate::corpus::segment_id(&format!("anon_{:02}", i / 10), 1, i % 10);
        for &(label, lit) in tpl {
            match label {
                None => text.push_str(lit),
                Some(l) => {
                    let pool = match l {
                        EntityLabel::Person => PERSONS,
                        EntityLabel::Location => PLACES,
                        EntityLabel::Organization => ORGS,
                        EntityLabel::Email => EMAILS,
                        EntityLabel::Date => DATES,
                        EntityLabel::Id => IDS,
                    };
                    let surface = pool[rng.random_range(0..pool.len())];
                    let start = text.chars().count();
                    text.push_str(surface);
                    spans.push(EntitySpan {
                        segment_id: id.clone(),
                        start,
                        end: start + surface.chars().count(),
                        label: l,
                        score: 0.9,
                    });
                }
            }
        }
        segments.push(crate::corpus::Segment::new(&format!("anon_{:02}", i / 10), 1, i % 10, text));
    }
    Ok((segments, spans))
}
