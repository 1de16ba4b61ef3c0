#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use periodica::abelian::Jacobian;
use periodica::numerics::PrecisionContext;
use periodica::pipeline::{load_curve, load_text, Analysis};
use rug::{Integer, Rational};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

type Slot = Arc<OnceLock<Arc<Analysis>>>;

/// Analysis of a fixture (or inline curve), computed once per process and precision.
pub fn analysis(curve: &str, bits: u32) -> Arc<Analysis> {
    static CACHE: OnceLock<Mutex<HashMap<(String, u32), Slot>>> = OnceLock::new();
    let slot = CACHE.get_or_init(Default::default).lock().unwrap().entry((curve.to_string(), bits)).or_default().clone();
    slot.get_or_init(|| {
        let path = data(&format!("{curve}.curve"));
        let (c, diffs) = if path.is_file() {
            let d = data(&format!("{curve}.diffs"));
            (load_curve(path.to_str().unwrap()).unwrap(), d.is_file().then(|| load_text(d.to_str().unwrap()).unwrap()))
        } else {
            (load_curve(curve).unwrap(), None)
        };
        Arc::new(Analysis::compute(&c, diffs.as_deref(), &PrecisionContext::new(bits), None).unwrap())
    })
    .clone()
}

pub fn jacobian(curve: &str, bits: u32) -> Jacobian {
    let a = analysis(curve, bits);
    Jacobian::new(&a.periods, &a.riemann, &PrecisionContext::new(bits))
}

/// One line per acceptance criterion, then fail the test if it did not hold.
pub fn report(id: usize, title: &str, checks: &[(&str, bool)]) {
    let ok = checks.iter().all(|c| c.1);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let line = if ok {
        format!("criterion {id:>2} PASS  {title}\n")
    } else {
        format!("criterion {id:>2} FAIL  {title}: {}\n", failed.join("; "))
    };
    // Straight to the handle, so the line shows even when the harness captures output.
    let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), line.as_bytes());
    assert!(ok, "criterion {id} failed: {failed:?}");
}

type C = (f64, f64);

fn mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Reduce τ to the standard fundamental domain of SL₂(ℤ).
fn reduce(mut re: f64, mut im: f64) -> (f64, f64) {
    for _ in 0..1000 {
        re -= re.round();
        let n = re * re + im * im;
        if n >= 1.0 - 1e-15 {
            break;
        }
        re = -re / n;
        im /= n;
    }
    (re, im)
}

/// j(τ) = 1728 E4³ / (E4³ − E6²) with Eisenstein series summed to convergence.
pub fn j_invariant(re: f64, im: f64) -> C {
    let (re, im) = reduce(re, im);
    let q = {
        let r = (-2.0 * std::f64::consts::PI * im).exp();
        let t = 2.0 * std::f64::consts::PI * re;
        (r * t.cos(), r * t.sin())
    };
    let mut e4 = (1.0, 0.0);
    let mut e6 = (1.0, 0.0);
    let mut qn = (1.0, 0.0);
    for n in 1..200u32 {
        qn = mul(qn, q);
        let s3: f64 = (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powi(3)).sum();
        let s5: f64 = (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powi(5)).sum();
        e4 = (e4.0 + 240.0 * s3 * qn.0, e4.1 + 240.0 * s3 * qn.1);
        e6 = (e6.0 - 504.0 * s5 * qn.0, e6.1 - 504.0 * s5 * qn.1);
    }
    let e43 = mul(mul(e4, e4), e4);
    let e62 = mul(e6, e6);
    let den = (e43.0 - e62.0, e43.1 - e62.1);
    let num = (1728.0 * e43.0, 1728.0 * e43.1);
    let d = den.0 * den.0 + den.1 * den.1;
    ((num.0 * den.0 + num.1 * den.1) / d, (num.1 * den.0 - num.0 * den.1) / d)
}

/// Reduced representative (a, b, c), 0 ≤ b ≤ a ≤ c, of a positive binary form a x² + b xy + c y² up to GL₂(ℤ).
pub fn reduce_binary(g: &[Vec<Rational>]) -> (Integer, Integer, Integer) {
    let mut den = Integer::from(1);
    for x in g.iter().flatten() {
        den.lcm_mut(x.denom());
    }
    let int = |x: Rational| (x * &den).numer().clone();
    let mut a = int(g[0][0].clone());
    let mut b = int(Rational::from(&g[0][1] * 2u32));
    let mut c = int(g[1][1].clone());
    loop {
        // b ← b − 2ka brings |b| ≤ a.
        let two_a = Integer::from(&a * 2u32);
        let k = Rational::from((b.clone(), two_a.clone())).round().numer().clone();
        c += Integer::from(&k * &k) * &a - Integer::from(&k * &b);
        b -= Integer::from(&k * &two_a);
        if c < a {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    (a, b.abs(), c)
}

/// Element-order histogram of the dihedral group of order 2n, built as permutations of n points.
pub fn dihedral_histogram(n: usize) -> BTreeMap<usize, usize> {
    let r: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let s: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
    let compose = |a: &Vec<usize>, b: &Vec<usize>| -> Vec<usize> { (0..n).map(|i| a[b[i]]).collect() };
    let id: Vec<usize> = (0..n).collect();
    let mut group: HashSet<Vec<usize>> = HashSet::from([id.clone()]);
    let mut frontier = vec![id.clone()];
    while let Some(x) = frontier.pop() {
        for g in [&r, &s] {
            let y = compose(&x, g);
            if group.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    let mut hist = BTreeMap::new();
    for g in &group {
        let mut p = g.clone();
        let mut k = 1;
        while p != id {
            p = compose(&p, g);
            k += 1;
        }
        *hist.entry(k).or_insert(0) += 1;
    }
    hist
}
