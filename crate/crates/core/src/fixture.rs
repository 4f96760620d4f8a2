//! Seeded synthetic project populations with planted channel profiles.
//!
//! A profile names the channels its projects carry. Binary channels
//! (flags and file names) follow the profile exactly unless `flip_noise`
//! is set. Count channels are drawn uniformly from a high range when
//! planted and a low range otherwise, which gives every blob continuous
//! spread.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Ecosystem, ProjectRecord, ProjectTable, Provenance, RawValue};
use crate::knowledge::{names, registry_default, ChannelRegistry, ValueKind};

/// Count range of a planted count channel.
pub const COUNT_HIGH: (u64, u64) = (600, 1000);
/// Count range of an unplanted count channel.
pub const COUNT_LOW: (u64, u64) = (0, 400);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedProfile {
    pub label: String,
    pub present: BTreeSet<String>,
    /// relative share of the population
    pub weight: f64,
    /// inclusive star range
    pub stars: (u64, u64),
}

impl PlantedProfile {
    pub fn new(label: &str, present: &[&str], weight: f64, stars: (u64, u64)) -> Self {
        PlantedProfile {
            label: label.to_owned(),
            present: present.iter().map(|s| s.to_string()).collect(),
            weight,
            stars,
        }
    }

    /// 0/1 per registry channel.
    pub fn indicator(&self, registry: &ChannelRegistry) -> Vec<bool> {
        registry.channels().iter().map(|c| self.present.contains(&c.name)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub ecosystem: Ecosystem,
    pub year: i32,
    pub n: usize,
    pub profiles: Vec<PlantedProfile>,
    /// per-channel probability of inverting a binary channel
    pub flip_noise: f64,
    pub seed: u64,
    pub id_prefix: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub table: ProjectTable,
    /// profile index of each project id
    pub labels: BTreeMap<String, usize>,
    pub profiles: Vec<PlantedProfile>,
}

impl Fixture {
    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.labels.get(id).copied()
    }

    pub fn merge(fixtures: Vec<Fixture>) -> Result<Fixture> {
        let mut profiles = Vec::new();
        let mut labels = BTreeMap::new();
        let mut tables = Vec::new();
        for f in fixtures {
            let offset = profiles.len();
            labels.extend(f.labels.into_iter().map(|(id, l)| (id, l + offset)));
            profiles.extend(f.profiles);
            tables.push(f.table);
        }
        Ok(Fixture {
            table: ProjectTable::merge(tables)?,
            labels,
            profiles,
        })
    }
}

fn text_value(channel: &str, rng: &mut ChaCha8Rng) -> String {
    let options: &[&str] = match channel {
        names::LICENSE => &["MIT", "Apache-2.0", "BSD-3-Clause", "GPL-3.0", "ISC"],
        names::CHANGELOG => &["CHANGELOG.md", "HISTORY.md", "CHANGES"],
        names::CODE_OF_CONDUCT => &["CODE_OF_CONDUCT.md"],
        names::CONTRIBUTING_GUIDELINES => &["CONTRIBUTING.md", ".github/CONTRIBUTING.md"],
        names::SECURITY_AUDIT => &["SECURITY.md", "audit.md"],
        names::README => &["README.md", "README.rst", "README"],
        _ => &["present"],
    };
    options[rng.random_range(0..options.len())].to_owned()
}

fn channel_value(kind: ValueKind, channel: &str, present: bool, rng: &mut ChaCha8Rng) -> RawValue {
    match kind {
        ValueKind::Count => {
            let (lo, hi) = if present { COUNT_HIGH } else { COUNT_LOW };
            RawValue::Count(rng.random_range(lo..=hi))
        }
        ValueKind::Flag => RawValue::Flag(present),
        ValueKind::Text if present => RawValue::Text(text_value(channel, rng)),
        ValueKind::Text => RawValue::Absent,
    }
}

fn random_date(year: i32, rng: &mut ChaCha8Rng) -> NaiveDate {
    let start = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let days = if NaiveDate::from_ymd_opt(year, 2, 29).is_some() { 366 } else { 365 };
    start + chrono::Days::new(rng.random_range(0..days))
}

/// Splits `n` by weight with largest-remainder rounding.
fn allocate(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

pub fn generate(spec: &FixtureSpec, registry: &ChannelRegistry) -> Result<Fixture> {
    if spec.profiles.is_empty() {
        return Err(Error::arg("fixture needs at least one profile"));
    }
    if !(0.0..=1.0).contains(&spec.flip_noise) {
        return Err(Error::arg(format!("flip noise must lie in [0, 1], got {}", spec.flip_noise)));
    }
    for p in &spec.profiles {
        if !(p.weight > 0.0) || p.stars.0 > p.stars.1 {
            return Err(Error::arg(format!("profile {:?} has a bad weight or star range", p.label)));
        }
        if let Some(unknown) = p.present.iter().find(|c| registry.lookup(c).is_none()) {
            return Err(Error::arg(format!("profile {:?} names unknown channel {unknown:?}", p.label)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let counts = allocate(spec.n, &spec.profiles.iter().map(|p| p.weight).collect::<Vec<_>>());
    let mut records = Vec::with_capacity(spec.n);
    let mut labels = BTreeMap::new();
    let mut serial = 0usize;
    for (label, (profile, &count)) in spec.profiles.iter().zip(&counts).enumerate() {
        for _ in 0..count {
            let id = format!("{}{serial:06}", spec.id_prefix);
            serial += 1;
            let channel_values = registry
                .channels()
                .iter()
                .map(|c| {
                    let mut present = profile.present.contains(&c.name);
                    if c.value_kind != ValueKind::Count && rng.random_bool(spec.flip_noise) {
                        present = !present;
                    }
                    (c.name.clone(), channel_value(c.value_kind, &c.name, present, &mut rng))
                })
                .collect();
            records.push(ProjectRecord {
                name: format!("{}-{}", profile.label.to_lowercase().replace(' ', "-"), id),
                ecosystem: spec.ecosystem.clone(),
                created: random_date(spec.year, &mut rng),
                stars: rng.random_range(profile.stars.0..=profile.stars.1),
                channel_values,
                id: id.clone(),
            });
            labels.insert(id, label);
        }
    }
    let provenance = Provenance {
        source: None,
        filters: vec![format!("fixture seed={} n={}", spec.seed, spec.n)],
    };
    Ok(Fixture {
        table: ProjectTable::new(records, provenance)?,
        labels,
        profiles: spec.profiles.clone(),
    })
}

/// Three well separated profiles of equal weight.
pub fn three_profiles() -> Vec<PlantedProfile> {
    use names::*;
    vec![
        PlantedProfile::new(
            "Documented",
            &[GITHUB_PAGES, README, WIKI, ISSUE_TRACKER, LICENSE, NUM_FORKS],
            1.0,
            (100, 5000),
        ),
        PlantedProfile::new(
            "Governed",
            &[CHANGELOG, CODE_OF_CONDUCT, CONTRIBUTING_GUIDELINES, LICENSE, SECURITY_THREAT_MODEL, ISSUE_TRACKER, NUM_OPEN_ISSUES],
            1.0,
            (100, 5000),
        ),
        PlantedProfile::new("Forked", &[SECURITY_AUDIT, FORK, README, NUM_FORKS, NUM_OPEN_ISSUES], 1.0, (100, 5000)),
    ]
}

pub fn planted_blobs(n: usize, seed: u64) -> Result<Fixture> {
    generate(
        &FixtureSpec {
            ecosystem: Ecosystem::Npm,
            year: 2016,
            n,
            profiles: three_profiles(),
            flip_noise: 0.0,
            seed,
            id_prefix: "blob".into(),
        },
        &registry_default(),
    )
}

/// Three yearly populations where `channel` rides on the majority profile
/// with presence `presence[i]` in year `years[i]`. A minority profile with
/// both count channels planted keeps the count scales anchored.
pub fn decline(
    n_per_year: usize,
    channel: &str,
    years: [i32; 3],
    presence: [f64; 3],
    seed: u64,
) -> Result<Fixture> {
    use names::*;
    let registry = registry_default();
    if registry.lookup(channel).is_none() {
        return Err(Error::arg(format!("unknown channel {channel:?}")));
    }
    let stable = [ISSUE_TRACKER, LICENSE, README];
    let mut fixtures = Vec::new();
    for (i, (&year, &p)) in years.iter().zip(&presence).enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::arg(format!("presence must lie in [0, 1], got {p}")));
        }
        let mut with: Vec<&str> = stable.to_vec();
        with.push(channel);
        let minority = PlantedProfile::new("Busy", &[FORK, CHANGELOG, NUM_FORKS, NUM_OPEN_ISSUES], 0.15, (10, 200));
        let mut profiles = vec![minority];
        if p > 0.0 {
            profiles.push(PlantedProfile::new(&format!("With {channel}"), &with, 0.85 * p, (10, 200)));
        }
        if p < 1.0 {
            profiles.push(PlantedProfile::new(&format!("Without {channel}"), &stable, 0.85 * (1.0 - p), (10, 200)));
        }
        fixtures.push(generate(
            &FixtureSpec {
                ecosystem: Ecosystem::Npm,
                year,
                n: n_per_year,
                profiles,
                flip_noise: 0.0,
                seed: seed.wrapping_add(i as u64),
                id_prefix: format!("y{year}-"),
            },
            &registry,
        )?);
    }
    Fixture::merge(fixtures)
}

/// Popular group carrying the five community channels, plus two larger or
/// smaller groups with lower stars.
pub fn popularity_profiles() -> Vec<PlantedProfile> {
    use names::*;
    vec![
        PlantedProfile::new(
            "Popular",
            &[CODE_OF_CONDUCT, CONTRIBUTING_GUIDELINES, ISSUE_TRACKER, LICENSE, WIKI, README],
            0.35,
            (5000, 20000),
        ),
        PlantedProfile::new("Plain", &[ISSUE_TRACKER, README, NUM_FORKS], 0.45, (50, 400)),
        PlantedProfile::new("Forks", &[FORK, GITHUB_PAGES, NUM_OPEN_ISSUES], 0.20, (10, 100)),
    ]
}

pub fn popularity(n: usize, ecosystem: Ecosystem, seed: u64) -> Result<Fixture> {
    let prefix = format!("{}-", ecosystem.as_str().to_lowercase());
    generate(
        &FixtureSpec {
            ecosystem,
            year: 2017,
            n,
            profiles: popularity_profiles(),
            flip_noise: 0.0,
            seed,
            id_prefix: prefix,
        },
        &registry_default(),
    )
}

/// One popularity population per known ecosystem.
pub fn seven_ecosystems(n_per: usize, seed: u64) -> Result<Fixture> {
    let fixtures = Ecosystem::KNOWN
        .iter()
        .enumerate()
        .map(|(i, eco)| popularity(n_per, eco.clone(), seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Fixture::merge(fixtures)
}

/// Independent random channel values: flags and texts present with
/// probability one half, counts heavy-tailed, about 5% of cells absent.
pub fn random_projects(n: usize, ecosystems: &[Ecosystem], years: &[i32], seed: u64) -> Result<ProjectTable> {
    if ecosystems.is_empty() || years.is_empty() {
        return Err(Error::arg("random projects need at least one ecosystem and one year"));
    }
    let registry = registry_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let channel_values = registry
                .channels()
                .iter()
                .map(|c| {
                    let v = if rng.random_bool(0.05) {
                        RawValue::Absent
                    } else {
                        match c.value_kind {
                            ValueKind::Count => {
                                let e: f64 = rng.random_range(0.0..4.0);
                                RawValue::Count(10f64.powf(e) as u64)
                            }
                            ValueKind::Flag => RawValue::Flag(rng.random_bool(0.5)),
                            ValueKind::Text => {
                                if rng.random_bool(0.5) {
                                    RawValue::Text(text_value(&c.name, &mut rng))
                                } else {
                                    RawValue::Absent
                                }
                            }
                        }
                    };
                    (c.name.clone(), v)
                })
                .collect();
            let year = years[rng.random_range(0..years.len())];
            ProjectRecord {
                id: format!("r{i:06}"),
                ecosystem: ecosystems[rng.random_range(0..ecosystems.len())].clone(),
                name: format!("project-{i}"),
                created: random_date(year, &mut rng),
                stars: rng.random_range(0..50_000),
                channel_values,
            }
        })
        .collect();
    ProjectTable::new(
        records,
        Provenance {
            source: None,
            filters: vec![format!("random seed={seed} n={n}")],
        },
    )
}

/// Realistic mixture over the seven ecosystems and 2015-2017: each
/// ecosystem draws from the popularity profiles with a little flip noise.
pub fn sample_population(n: usize, seed: u64) -> Result<ProjectTable> {
    let registry = registry_default();
    let ecos = &Ecosystem::KNOWN;
    let counts = allocate(n, &[1.0; 7]);
    let mut tables = Vec::new();
    for (i, (eco, &count)) in ecos.iter().zip(&counts).enumerate() {
        let years = allocate(count, &[1.0; 3]);
        for (j, (&year, &m)) in [2015, 2016, 2017].iter().zip(&years).enumerate() {
            let f = generate(
                &FixtureSpec {
                    ecosystem: eco.clone(),
                    year,
                    n: m,
                    profiles: popularity_profiles(),
                    flip_noise: 0.05,
                    seed: seed.wrapping_add((i * 3 + j) as u64),
                    id_prefix: format!("{}{}-", eco.as_str().to_lowercase(), year),
                },
                &registry,
            )?;
            tables.push(f.table);
        }
    }
    ProjectTable::merge(tables)
}
