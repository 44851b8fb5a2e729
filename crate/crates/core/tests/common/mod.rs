//! Hand-written model of the bundled domain, kept independent of the
//! domain parser and grounder so tests can check one against the other.
#![allow(dead_code)]

use std::collections::VecDeque;

pub const INTERNET: u32 = 1 << 0;
pub const SUDO: u32 = 1 << 1;

/// Software in declaration order: gedit, firefox, vlc.
pub const SOFTWARE: [&str; 3] = ["gedit", "firefox", "vlc"];

pub fn installed(sw: usize) -> u32 {
    1 << (2 + sw)
}

pub fn open(sw: usize) -> u32 {
    1 << (5 + sw)
}

/// Action names in the order the world is expected to list them.
pub fn action_names() -> Vec<String> {
    let mut names = Vec::new();
    for sw in ["firefox", "gedit", "vlc"] {
        names.push(format!("AptGet({sw})"));
    }
    for sw in ["firefox", "gedit", "vlc"] {
        names.push(format!("AptRemove({sw})"));
    }
    for sw in ["firefox", "gedit", "vlc"] {
        names.push(format!("Close_{sw}(file)"));
    }
    names.push("Internet_Off()".into());
    names.push("Internet_On()".into());
    for sw in ["firefox", "gedit", "vlc"] {
        names.push(format!("Open_{sw}(file)"));
    }
    names.push("Sudo_Off()".into());
    names.push("Sudo_On()".into());
    names
}

fn sw_index(name: &str) -> usize {
    SOFTWARE.iter().position(|s| *s == name).unwrap()
}

/// Successor of `state` under the named action, or `None` if it cannot run.
pub fn step(state: u32, action: &str) -> Option<u32> {
    let has = |bit: u32| state & bit != 0;
    let (head, arg) = action.trim_end_matches(')').split_once('(').unwrap();
    match head {
        "AptGet" => (has(SUDO) && has(INTERNET)).then(|| state | installed(sw_index(arg))),
        "AptRemove" => {
            let s = sw_index(arg);
            (has(SUDO) && has(INTERNET)).then(|| state & !installed(s) & !open(s))
        }
        "Internet_On" => (!has(INTERNET)).then_some(state | INTERNET),
        "Internet_Off" => has(INTERNET).then_some(state & !INTERNET),
        "Sudo_On" => (!has(SUDO)).then_some(state | SUDO),
        "Sudo_Off" => has(SUDO).then_some(state & !SUDO),
        _ => {
            let (verb, sw) = head.split_once('_').unwrap();
            let s = sw_index(sw);
            match verb {
                "Open" => (has(installed(s)) && !has(SUDO)).then_some(state | open(s)),
                "Close" => has(open(s)).then_some(state & !open(s)),
                _ => panic!("unknown action {action}"),
            }
        }
    }
}

/// Mask of the domain's initial state.
pub fn init_mask() -> u32 {
    INTERNET | installed(1)
}

/// Breadth-first distances from `start` to every state (u32::MAX if unreachable).
pub fn distances(start: u32) -> Vec<u32> {
    let names = action_names();
    let mut dist = vec![u32::MAX; 256];
    dist[start as usize] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for a in &names {
            if let Some(n) = step(s, a) {
                if dist[n as usize] == u32::MAX {
                    dist[n as usize] = dist[s as usize] + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// Shortest plan length to any state where `bit` has `value`.
pub fn shortest(start: u32, goal: &[(u32, bool)]) -> Option<u32> {
    let dist = distances(start);
    (0..256u32)
        .filter(|s| goal.iter().all(|&(bit, v)| (s & bit != 0) == v))
        .map(|s| dist[s as usize])
        .filter(|&d| d != u32::MAX)
        .min()
}

/// Bit string in the world's atom order.
pub fn bits(mask: u32) -> String {
    (0..8).map(|i| if mask & (1 << i) != 0 { '1' } else { '0' }).collect()
}

pub fn mask_of(values: &[bool]) -> u32 {
    values.iter().enumerate().filter(|(_, v)| **v).map(|(i, _)| 1 << i).sum()
}

/// Brute-force ranking straight from raw text: rebuilds every document
/// vector per query with no inverted index and returns post ids with
/// scores, best first, ties by ascending id.
pub fn brute_force_rank(posts: &[(String, String)], stopwords: &[&str], query: &str, k: usize) -> Vec<(String, f64)> {
    use std::collections::HashMap;
    let words = |text: &str| -> Vec<String> {
        let lower = text.to_lowercase();
        let mut out = Vec::new();
        let mut cur = String::new();
        for c in lower.chars().chain(std::iter::once(' ')) {
            if c.is_alphanumeric() {
                cur.push(c);
            } else if !cur.is_empty() {
                if cur.chars().count() > 1 && !stopwords.contains(&cur.as_str()) {
                    out.push(cur.clone());
                }
                cur.clear();
            }
        }
        out
    };
    let docs: Vec<Vec<String>> = posts.iter().map(|(_, t)| words(t)).collect();
    let n = docs.len() as f64;
    let idf = |term: &str| {
        let df = docs.iter().filter(|d| d.iter().any(|w| w == term)).count();
        if df == 0 { 0.0 } else { (1.0 + n / df as f64).ln() }
    };
    let vector = |tokens: &[String]| {
        let mut v: HashMap<String, f64> = HashMap::new();
        for t in tokens {
            *v.entry(t.clone()).or_insert(0.0) += 1.0;
        }
        for (t, w) in v.iter_mut() {
            *w *= idf(t);
        }
        v
    };
    let q = vector(&words(query));
    let q_norm = q.values().map(|w| w * w).sum::<f64>().sqrt();
    let mut scored: Vec<(String, f64)> = Vec::new();
    for ((id, _), d) in posts.iter().zip(&docs) {
        let dv = vector(d);
        let dot: f64 = q.iter().map(|(t, w)| w * dv.get(t).copied().unwrap_or(0.0)).sum();
        if dot > 0.0 {
            let norm = dv.values().map(|w| w * w).sum::<f64>().sqrt();
            scored.push((id.clone(), dot / (q_norm * norm)));
        }
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// The 20 error messages used for ranking checks.
pub const QUERY_SUITE: [&str; 20] = [
    "E: Could not open lock file /var/lib/dpkg/lock-frontend - open (13: Permission denied)",
    "Permission denied",
    "E: Unable to locate package vlc",
    "E: Unable to locate package firefox",
    "Temporary failure resolving 'archive.ubuntu.com'",
    "Could not resolve host: no internet connection",
    "firefox: command not found",
    "gedit: command not found",
    "vlc: command not found",
    "Command 'vlc' not found, but can be installed with: sudo apt install vlc",
    "are you root?",
    "Failed to fetch network is unreachable",
    "how do I exit a root shell",
    "close firefox from the terminal",
    "kill vlc process that will not quit",
    "open a text file with gedit",
    "uninstall firefox completely with apt-get remove",
    "Package gedit is not installed, so not removed",
    "network manager turn wifi on",
    "sudo: a password is required",
];
