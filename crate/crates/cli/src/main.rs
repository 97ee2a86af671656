use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use enriques::document::{parse_document, serialize_document, validate_document, Document, Extent, PointNames};
use enriques::dot::{render_dot, Overlay};
use enriques::oracle::{polar_invariant_table, polar_invariants_local, CurveCluster};
use enriques::recovery::{recover_with, Algorithm, WalkDecision};
use enriques::similarity::canonical_digest;
use enriques::{cluster, BigInt, Cluster, Invariants, PointId, WeightKind, WeightedCluster};

#[derive(Parser)]
#[command(name = "enriques", version, about = "Weighted clusters of infinitely near points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a cluster document and list every problem found.
    Validate { file: PathBuf },
    /// Recover singular points and values from a base-point cluster.
    Recover {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Alg::Basic)]
        algorithm: Alg,
        /// Output path; with `--emit both` two files `<stem>.values.json`
        /// and `<stem>.multiplicities.json` are written.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Emit::Both)]
        emit: Emit,
        /// Print every step of the satellite walks.
        #[arg(long)]
        trace: bool,
    },
    /// Polar invariants of a curve given by its singular points.
    Invariants {
        file: PathBuf,
        /// Only the invariants at this free point and its satellites.
        #[arg(long)]
        local: Option<String>,
    },
    /// Compare two clusters. Exit status 1 when they are not related.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Similar)]
        mode: Mode,
    },
    /// Graphviz drawing of the arena.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Annotate::Weights)]
        annotate: Annotate,
        /// Further clusters on the same points, matched by id.
        #[arg(long)]
        overlay: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Basic,
    Grouped,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Values,
    Multiplicities,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Equal,
    Similar,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Annotate {
    Mn,
    Weights,
    None,
}

enum Fail {
    /// A negative answer or a domain error; exit status 1.
    Domain(String),
    /// Unusable input; exit status 2.
    Input(String),
}

type Outcome = Result<ExitCode, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Document<BigInt>, Fail> {
    let text = read(path)?;
    parse_document(&text).map_err(|e| match e {
        enriques::Error::Validation(_) => {
            let lines = validate_document::<BigInt>(&text);
            Fail::Input(format!("{}: {}", path.display(), lines.join("\n  ")))
        }
        e => Fail::Input(format!("{}: {e}", path.display())),
    })
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| Fail::Domain(format!("{}: {e}", path.display())))
}

fn validate(file: &Path) -> Outcome {
    let problems = validate_document::<BigInt>(&read(file)?);
    if problems.is_empty() {
        println!("ok");
        return Ok(ExitCode::SUCCESS);
    }
    for p in &problems {
        println!("{p}");
    }
    Ok(ExitCode::from(2))
}

fn recover(file: &Path, algorithm: Alg, out: Option<&Path>, emit: Emit, trace: bool) -> Outcome {
    let mut doc = load(file)?;
    if doc.cluster.kind() != WeightKind::Virtual {
        return Err(Fail::Input(format!("{}: expected a virtual cluster", file.display())));
    }
    let alg = match algorithm {
        Alg::Basic => Algorithm::Basic,
        Alg::Grouped => Algorithm::Grouped,
    };
    let names = doc.names.clone();
    let report = recover_with(&mut doc.tree, &doc.cluster, alg, trace).map_err(|f| {
        let mut msg = f.error.to_string();
        for a in &f.partial {
            msg.push_str(&format!(
                "\n  completed: {} -> {} (I = {})",
                names.name(a.dicritical),
                names.name(a.rupture),
                a.invariant
            ));
        }
        Fail::Domain(msg)
    })?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if trace {
        for (d, steps) in &report.walks {
            println!("walk for {}", names.name(*d));
            for s in steps {
                let what = match s.decision {
                    WalkDecision::First => ">I→first",
                    WalkDecision::Second => "<I→second",
                    WalkDecision::Stop => "=I stop",
                };
                println!("  {} {}/{} {what}", names.name(s.point), s.m, s.n);
            }
        }
    }
    let r = &report.result;
    println!("d\tI_d\tp_d\tq_d");
    for a in &r.associations {
        let p = a.base.map(|(_, p)| names.name(p)).unwrap_or_else(|| "-".into());
        println!("{}\t{}\t{}\t{}", names.name(a.dicritical), a.invariant, p, names.name(a.rupture));
    }
    let ser = |c: &Cluster| {
        serialize_document(&doc.tree, c, &names, Extent::Cluster).map_err(|e| Fail::Domain(e.to_string()))
    };
    let mut docs = Vec::new();
    if emit != Emit::Multiplicities {
        docs.push(("values", ser(&r.values)?));
    }
    if emit != Emit::Values {
        docs.push(("multiplicities", ser(&r.multiplicities)?));
    }
    match out {
        None => {
            for (_, text) in &docs {
                print!("{text}");
            }
        }
        Some(path) if docs.len() == 1 => write(path, &docs[0].1)?,
        Some(path) => {
            let stem = path.with_extension("");
            for (what, text) in &docs {
                let p = PathBuf::from(format!("{}.{what}.json", stem.display()));
                write(&p, text)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn curve_of(doc: &Document<BigInt>, file: &Path) -> Result<CurveCluster<BigInt>, Fail> {
    let mult = match doc.cluster.kind() {
        WeightKind::Multiplicity => doc.cluster.clone(),
        WeightKind::Value => cluster::multiplicities_from_values(&doc.tree, &doc.cluster)
            .map_err(|e| Fail::Input(format!("{}: {e}", file.display())))?,
        WeightKind::Virtual => {
            return Err(Fail::Input(format!("{}: expected multiplicities or values", file.display())))
        }
    };
    CurveCluster::new(&doc.tree, mult).map_err(|e| Fail::Input(format!("{}: {e}", file.display())))
}

fn invariants(file: &Path, local: Option<&str>) -> Outcome {
    let doc = load(file)?;
    let curve = curve_of(&doc, file)?;
    let table = match local {
        None => polar_invariant_table(&doc.tree, &curve),
        Some(name) => {
            let p = doc.names.get(name).filter(|p| doc.tree.contains(*p));
            let p = p.ok_or_else(|| Fail::Input(format!("no point '{name}'")))?;
            polar_invariants_local(&doc.tree, &curve, p)
        }
    }
    .map_err(|e| Fail::Domain(e.to_string()))?;
    println!("point\tI");
    for (p, i) in table {
        println!("{}\t{}", doc.names.name(p), i);
    }
    Ok(ExitCode::SUCCESS)
}

type Labeled = BTreeSet<(String, Option<String>, Option<String>, String)>;

fn labeled(doc: &Document<BigInt>) -> Labeled {
    let n = &doc.names;
    doc.cluster
        .iter()
        .map(|(p, w)| {
            let r = doc.tree.record(p);
            (n.name(p), r.parent.map(|q| n.name(q)), r.second_proximity.map(|q| n.name(q)), w.to_string())
        })
        .collect()
}

fn compare(a: &Path, b: &Path, mode: Mode) -> Outcome {
    let da = load(a)?;
    let db = load(b)?;
    let ha = canonical_digest(&da.tree, &da.cluster).map_err(|e| Fail::Domain(e.to_string()))?;
    let hb = canonical_digest(&db.tree, &db.cluster).map_err(|e| Fail::Domain(e.to_string()))?;
    println!("{}\t{ha}", a.display());
    println!("{}\t{hb}", b.display());
    let same_kind = da.cluster.kind() == db.cluster.kind();
    let related = match mode {
        Mode::Similar => ha == hb,
        Mode::Equal => same_kind && labeled(&da) == labeled(&db),
    };
    let word = match mode {
        Mode::Similar => "similar",
        Mode::Equal => "equal",
    };
    if related {
        println!("{word}");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("not {word}");
        Ok(ExitCode::from(1))
    }
}

/// Moves an overlay document onto the main arena by point id.
fn transplant(base: &Document<BigInt>, other: &Document<BigInt>, file: &Path) -> Result<Cluster, Fail> {
    let mut weights = BTreeMap::new();
    for (p, w) in other.cluster.iter() {
        let name = other.names.name(p);
        let q = base
            .names
            .get(&name)
            .filter(|q| base.tree.contains(*q))
            .ok_or_else(|| Fail::Input(format!("{}: point '{name}' is not in the main arena", file.display())))?;
        let pr = other.tree.record(p);
        let qr = base.tree.record(q);
        let same = pr.parent.map(|x| other.names.name(x)) == qr.parent.map(|x| base.names.name(x))
            && pr.second_proximity.map(|x| other.names.name(x))
                == qr.second_proximity.map(|x| base.names.name(x));
        if !same {
            return Err(Fail::Input(format!("{}: point '{name}' sits differently in the main arena", file.display())));
        }
        weights.insert(q, w.clone());
    }
    WeightedCluster::new(&base.tree, other.cluster.kind(), weights)
        .map_err(|e| Fail::Input(format!("{}: {e}", file.display())))
}

fn render(file: &Path, annotate: Annotate, overlay_files: &[PathBuf]) -> Outcome {
    let doc = load(file)?;
    let mut extra = Vec::new();
    for f in overlay_files {
        let o = load(f)?;
        extra.push((f.display().to_string(), transplant(&doc, &o, f)?));
    }
    let mut ann: BTreeMap<PointId, String> = BTreeMap::new();
    match annotate {
        Annotate::None => {}
        Annotate::Weights => {
            for (p, w) in doc.cluster.iter() {
                ann.insert(p, w.to_string());
            }
        }
        Annotate::Mn => {
            if doc.cluster.kind() != WeightKind::Virtual {
                return Err(Fail::Input("--annotate mn needs a virtual cluster".into()));
            }
            let mut inv = Invariants::compute(&doc.tree, &doc.cluster).map_err(|e| Fail::Domain(e.to_string()))?;
            for p in doc.tree.ids() {
                let (n, m) = inv.extend_to(&doc.tree, p).map_err(|e| Fail::Domain(e.to_string()))?;
                ann.insert(p, format!("{m}/{n}"));
            }
        }
    }
    let mut overlays = vec![Overlay {
        name: file.display().to_string(),
        cluster: &doc.cluster,
        filled: doc.cluster.kind() != WeightKind::Virtual,
    }];
    for (name, c) in &extra {
        overlays.push(Overlay { name: name.clone(), cluster: c, filled: c.kind() != WeightKind::Virtual });
    }
    let names: &PointNames = &doc.names;
    let text = render_dot(&doc.tree, names, &overlays, &ann).map_err(|e| Fail::Domain(e.to_string()))?;
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Recover { file, algorithm, out, emit, trace } => {
            recover(file, *algorithm, out.as_deref(), *emit, *trace)
        }
        Command::Invariants { file, local } => invariants(file, local.as_deref()),
        Command::Compare { a, b, mode } => compare(a, b, *mode),
        Command::Render { file, annotate, overlay } => render(file, *annotate, overlay),
    };
    match outcome {
        Ok(code) => code,
        Err(Fail::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Input(msg)) => {
            eprintln!("invalid input: {msg}");
            ExitCode::from(2)
        }
    }
}
