//! Pabulib participatory-budgeting files.
//!
//! A `.pb` file has three sections, each introduced by a line holding only its
//! name (`META`, `PROJECTS`, `VOTES`) and followed by a `;`-separated header row
//! and data rows. The `vote` column of `VOTES` lists approved project ids
//! separated by commas; scoring and ordinal columns are kept as attributes but
//! otherwise ignored. Costs are parsed as plain attributes and unused.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index;

use crate::election::{Ballot, Election};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Minimum instance size for subsampling to 50 candidates and 1000 voters.
pub const MIN_PROJECTS: usize = 50;
pub const MIN_VOTERS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    pub id: String,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PabulibVote {
    pub voter_id: String,
    /// Approved project ids, deduplicated, in first-mention order.
    pub approved: Vec<String>,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PabulibInstance {
    pub meta: Vec<(String, String)>,
    pub project_columns: Vec<String>,
    pub projects: Vec<Project>,
    pub vote_columns: Vec<String>,
    pub votes: Vec<PabulibVote>,
}

struct Section<'a> {
    name: &'static str,
    // 1-based file line of the section's header row
    first_line: usize,
    lines: Vec<&'a str>,
}

fn split_sections(text: &str) -> Result<[Section<'_>; 3]> {
    const NAMES: [&str; 3] = ["META", "PROJECTS", "VOTES"];
    let mut sections: Vec<Section<'_>> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let trimmed = raw.trim();
        if let Some(&name) = NAMES.iter().find(|n| trimmed.eq_ignore_ascii_case(n)) {
            let expected = NAMES[sections.len().min(2)];
            if sections.len() >= 3 || name != expected {
                return Err(Error::parse(
                    line_no,
                    format!("section {name} out of order; expected {expected}"),
                ));
            }
            sections.push(Section {
                name,
                first_line: line_no + 1,
                lines: Vec::new(),
            });
        } else if let Some(current) = sections.last_mut() {
            current.lines.push(raw);
        } else if !trimmed.is_empty() {
            return Err(Error::parse(line_no, "content before the META section"));
        }
    }
    if sections.len() < 3 {
        let missing = NAMES[sections.len()];
        return Err(Error::parse(
            last_line.max(1),
            format!("missing {missing} section"),
        ));
    }
    let votes = sections.pop().expect("three sections");
    let projects = sections.pop().expect("three sections");
    let meta = sections.pop().expect("three sections");
    Ok([meta, projects, votes])
}

/// Data rows tagged with their file line number.
type Rows = Vec<(usize, Vec<String>)>;

/// Header plus data rows of one section.
fn read_rows(section: &Section<'_>) -> Result<(Vec<String>, Rows)> {
    let mut header = None;
    let mut rows = Vec::new();
    for (offset, line) in section.lines.iter().enumerate() {
        let line_no = section.first_line + offset;
        if line.trim().is_empty() {
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b';')
            .has_headers(false)
            .flexible(true)
            .from_reader(line.as_bytes());
        let record = match reader.records().next() {
            Some(Ok(record)) => record,
            Some(Err(e)) => return Err(Error::parse(line_no, format!("malformed row: {e}"))),
            None => continue,
        };
        let fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        match &header {
            None => header = Some((line_no, fields)),
            Some((_, h)) => {
                if fields.len() != h.len() {
                    return Err(Error::parse(
                        line_no,
                        format!(
                            "{} row has {} fields, header has {}",
                            section.name,
                            fields.len(),
                            h.len()
                        ),
                    ));
                }
                rows.push((line_no, fields));
            }
        }
    }
    let (_, header) = header.ok_or_else(|| {
        Error::parse(
            section.first_line,
            format!("{} section has no header row", section.name),
        )
    })?;
    Ok((header, rows))
}

fn column(header: &[String], name: &str, section: &Section<'_>) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        Error::parse(
            section.first_line,
            format!("{} header lacks a `{name}` column", section.name),
        )
    })
}

fn attributes(header: &[String], fields: &[String], skip: &[usize]) -> BTreeMap<String, String> {
    header
        .iter()
        .zip(fields)
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, (h, f))| (h.clone(), f.clone()))
        .collect()
}

pub fn parse_pabulib_bytes(bytes: &[u8]) -> Result<PabulibInstance> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        Error::parse(line, "file is not valid UTF-8")
    })?;
    parse_pabulib(text)
}

pub fn parse_pabulib(text: &str) -> Result<PabulibInstance> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let [meta_section, project_section, vote_section] = split_sections(text)?;

    let (meta_header, meta_rows) = read_rows(&meta_section)?;
    if meta_header.len() != 2 {
        return Err(Error::parse(
            meta_section.first_line,
            "META header must have two columns",
        ));
    }
    let meta = meta_rows
        .into_iter()
        .map(|(_, f)| (f[0].clone(), f[1].clone()))
        .collect();

    let (project_columns, project_rows) = read_rows(&project_section)?;
    let id_col = column(&project_columns, "project_id", &project_section)?;
    let mut project_index = HashMap::new();
    let mut projects = Vec::with_capacity(project_rows.len());
    for (line_no, fields) in project_rows {
        let id = fields[id_col].clone();
        if project_index.insert(id.clone(), projects.len()).is_some() {
            return Err(Error::parse(
                line_no,
                format!("duplicate project id `{id}`"),
            ));
        }
        projects.push(Project {
            attributes: attributes(&project_columns, &fields, &[id_col]),
            id,
        });
    }
    if projects.is_empty() {
        return Err(Error::parse(project_section.first_line, "no projects"));
    }

    let (vote_columns, vote_rows) = read_rows(&vote_section)?;
    let voter_col = column(&vote_columns, "voter_id", &vote_section)?;
    let vote_col = column(&vote_columns, "vote", &vote_section)?;
    let mut votes = Vec::with_capacity(vote_rows.len());
    for (line_no, fields) in vote_rows {
        let mut approved: Vec<String> = Vec::new();
        for id in fields[vote_col]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
        {
            if !project_index.contains_key(id) {
                return Err(Error::parse(
                    line_no,
                    format!("vote names unknown project `{id}`"),
                ));
            }
            if !approved.iter().any(|a| a == id) {
                approved.push(id.to_string());
            }
        }
        votes.push(PabulibVote {
            voter_id: fields[voter_col].clone(),
            approved,
            attributes: attributes(&vote_columns, &fields, &[voter_col, vote_col]),
        });
    }
    if votes.is_empty() {
        return Err(Error::parse(vote_section.first_line, "no voters"));
    }

    Ok(PabulibInstance {
        meta,
        project_columns,
        projects,
        vote_columns,
        votes,
    })
}

impl PabulibInstance {
    /// The approval election over projects in file order, plus the project id of each candidate.
    pub fn to_election(&self) -> Result<(Election, Vec<String>)> {
        let index: HashMap<&str, usize> = self
            .projects
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.as_str(), i))
            .collect();
        let ballots = self
            .votes
            .iter()
            .map(|v| {
                v.approved
                    .iter()
                    .map(|id| index[id.as_str()])
                    .collect::<Ballot>()
            })
            .collect();
        let labels = self.projects.iter().map(|p| p.id.clone()).collect();
        Ok((
            Election::from_ballots(self.projects.len(), ballots)?,
            labels,
        ))
    }

    /// Serializes back to `.pb` text with the original column order.
    pub fn to_pb_string(&self) -> String {
        fn row<'a>(fields: impl Iterator<Item = &'a str>) -> String {
            let mut w = csv::WriterBuilder::new()
                .delimiter(b';')
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(fields).expect("writing to memory");
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("UTF-8 fields")
        }
        let mut out = String::from("META\n");
        out.push_str(&row(["key", "value"].into_iter()));
        for (k, v) in &self.meta {
            out.push_str(&row([k.as_str(), v.as_str()].into_iter()));
        }
        out.push_str("PROJECTS\n");
        out.push_str(&row(self.project_columns.iter().map(String::as_str)));
        for p in &self.projects {
            out.push_str(&row(self.project_columns.iter().map(|c| {
                if c == "project_id" {
                    p.id.as_str()
                } else {
                    p.attributes.get(c).map(String::as_str).unwrap_or("")
                }
            })));
        }
        out.push_str("VOTES\n");
        out.push_str(&row(self.vote_columns.iter().map(String::as_str)));
        for v in &self.votes {
            let joined = v.approved.join(",");
            out.push_str(&row(self.vote_columns.iter().map(|c| match c.as_str() {
                "voter_id" => v.voter_id.as_str(),
                "vote" => joined.as_str(),
                other => v.attributes.get(other).map(String::as_str).unwrap_or(""),
            })));
        }
        out
    }
}

pub fn is_large_enough(e: &Election) -> bool {
    e.m() >= MIN_PROJECTS && e.n() >= MIN_VOTERS
}

/// A subsampled election and the original indices it kept, both ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsample {
    pub election: Election,
    pub candidates: Vec<usize>,
    pub voters: Vec<usize>,
}

/// Keeps a uniform random set of `m_target` candidates and `n_target` voters.
/// Kept candidates are renumbered in their original order; each ballot becomes
/// its intersection with the kept set, and voters left with empty ballots stay.
pub fn subsample_indexed(
    e: &Election,
    m_target: usize,
    n_target: usize,
    seed: RngSeed,
) -> Result<Subsample> {
    if m_target == 0 || n_target == 0 || m_target > e.m() || n_target > e.n() {
        return Err(Error::InvalidParameter(format!(
            "cannot subsample (m={}, n={}) to (m={m_target}, n={n_target})",
            e.m(),
            e.n()
        )));
    }
    let mut rng = seed.rng();
    let mut candidates = index::sample(&mut rng, e.m(), m_target).into_vec();
    let mut voters = index::sample(&mut rng, e.n(), n_target).into_vec();
    candidates.sort_unstable();
    voters.sort_unstable();
    let mut renumber = vec![usize::MAX; e.m()];
    for (new, &old) in candidates.iter().enumerate() {
        renumber[old] = new;
    }
    let ballots = voters
        .iter()
        .map(|&v| {
            e.votes()[v]
                .approved()
                .iter()
                .filter_map(|&c| (renumber[c] != usize::MAX).then_some(renumber[c]))
                .collect()
        })
        .collect();
    Ok(Subsample {
        election: Election::from_ballots(m_target, ballots)?,
        candidates,
        voters,
    })
}

pub fn subsample(
    e: &Election,
    m_target: usize,
    n_target: usize,
    seed: RngSeed,
) -> Result<Election> {
    subsample_indexed(e, m_target, n_target, seed).map(|s| s.election)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "META\nkey;value\ndescription;test\nnum_projects;2\nPROJECTS\nproject_id;cost;name\n1;100;Park\n2;250;\"Road; north\"\nVOTES\nvoter_id;age;vote\nv1;30;1,2\nv2;41;2\n";

    #[test]
    fn parses_minimal_file() {
        let inst = parse_pabulib(MINIMAL).unwrap();
        assert_eq!(inst.meta[0], ("description".into(), "test".into()));
        assert_eq!(inst.projects[1].attributes["name"], "Road; north");
        assert_eq!(inst.votes[0].attributes["age"], "30");
        let (e, labels) = inst.to_election().unwrap();
        assert_eq!((e.m(), e.n()), (2, 2));
        assert_eq!(labels, vec!["1", "2"]);
        assert_eq!(e.to_text(), "2 2\n0,1\n1\n");
    }

    #[test]
    fn tolerates_bom_crlf_and_duplicate_approvals() {
        let text = format!(
            "\u{feff}{}",
            MINIMAL
                .replace('\n', "\r\n")
                .replace("v2;41;2", "v2;41;2,2")
        );
        let inst = parse_pabulib(&text).unwrap();
        assert_eq!(inst.votes[1].approved, vec!["2"]);
    }

    #[test]
    fn errors_cite_lines() {
        let bad = MINIMAL.replace("v2;41;2", "v2;41;7");
        let err = parse_pabulib(&bad).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 12, .. }), "{err}");

        let err = parse_pabulib(
            "META\nkey;value\nPROJECTS\nproject_id;cost\n1;5\nVOTES\nvoter_id;vote\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("no voters"), "{err}");

        let err = parse_pabulib("META\nkey;value\nPROJECTS\nproject_id;cost\n1;5\n").unwrap_err();
        assert!(err.to_string().contains("missing VOTES"), "{err}");

        let err = parse_pabulib(&MINIMAL.replace("v1;30;1,2", "v1;30")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 11, .. }), "{err}");

        let err = parse_pabulib(&MINIMAL.replace("voter_id;age;vote", "voter_id;age;ballot"))
            .unwrap_err();
        assert!(err.to_string().contains("`vote`"), "{err}");

        assert!(parse_pabulib_bytes(&[0x4d, 0xff, 0xfe]).is_err());
    }

    #[test]
    fn pb_text_round_trips() {
        let inst = parse_pabulib(MINIMAL).unwrap();
        let again = parse_pabulib(&inst.to_pb_string()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn subsample_examples() {
        let e = Election::new(5, vec![vec![0, 4], vec![1, 2], vec![], vec![3]]).unwrap();
        assert_eq!(subsample(&e, 5, 4, RngSeed(1)).unwrap(), e);
        let a = subsample_indexed(&e, 3, 2, RngSeed(9)).unwrap();
        assert_eq!(a, subsample_indexed(&e, 3, 2, RngSeed(9)).unwrap());
        assert!(a.election.total_approvals() <= e.total_approvals());
        assert!(subsample(&e, 6, 2, RngSeed(1)).is_err());
        assert!(subsample(&e, 2, 5, RngSeed(1)).is_err());
        assert!(!is_large_enough(&e));
    }

    proptest! {
        #[test]
        fn parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
            let _ = parse_pabulib_bytes(&bytes);
        }

        #[test]
        fn parser_never_panics_on_section_soup(
            lines in proptest::collection::vec(
                prop_oneof![
                    Just("META".to_string()),
                    Just("PROJECTS".to_string()),
                    Just("VOTES".to_string()),
                    Just("key;value".to_string()),
                    Just("project_id;cost".to_string()),
                    Just("voter_id;vote".to_string()),
                    "[0-9;,\"a-z]{0,12}",
                ],
                0..20,
            )
        ) {
            let _ = parse_pabulib(&lines.join("\n"));
        }

        #[test]
        fn subsample_keeps_intersections(
            votes in proptest::collection::vec(proptest::collection::vec(0usize..9, 0..9), 1..12),
            seed in any::<u64>(),
            m_target in 1usize..=9,
        ) {
            let e = Election::new(9, votes).unwrap();
            let n_target = 1 + (seed as usize % e.n());
            let s = subsample_indexed(&e, m_target, n_target, RngSeed(seed)).unwrap();
            for (ballot, &v) in s.election.votes().iter().zip(&s.voters) {
                let expected: Vec<usize> = s.candidates.iter().enumerate()
                    .filter(|(_, &c)| e.votes()[v].contains(c))
                    .map(|(new, _)| new)
                    .collect();
                prop_assert_eq!(ballot.approved(), expected.as_slice());
            }
        }
    }
}
