//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Volumes are checked on every bisection performed by
//! criteria 2-7 and the final meshes of criteria 2, 6 and 7 are round-tripped
//! through the text format.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use nbisect::criteria::{distance_to_hemisphere, simplex_diameter};
use nbisect::driver::uniform_refine_with;
use nbisect::quality::shape_quality;
use nbisect::{
    bisect_simplices, get_faces, get_non_conformal_simplices, is_mesh_conformal, is_reflected, kuhn_mesh,
    local_refine_with, mark_mesh, quality_stats, random_simplex_mesh, read_mesh_str, regular_simplex_mesh,
    select_by_hypersphere, select_random, similarity_classes, simplex_volume, write_mesh_string, BisectionObserver,
    Element, GridSpec, Halfspace, MaubachSimplex, Mesh, MultiId, RefineOptions, RefinementSet, Simplex,
    VertexTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Checks `|vol(a) + vol(b) - vol(parent)| <= 1e-12 vol(parent)` on every
/// bisection it observes.
#[derive(Default)]
struct VolumeCheck {
    bisections: usize,
    worst: f64,
    failures: usize,
}

impl BisectionObserver for VolumeCheck {
    fn on_bisection(&mut self, parent: &Element, first: &Element, second: &Element, vt: &VertexTable) {
        let vol = |e: &Element| simplex_volume(e.simplex(), vt).expect("vertices are in the table");
        let p = vol(parent);
        let rel = (vol(first) + vol(second) - p).abs() / p;
        self.bisections += 1;
        self.worst = self.worst.max(rel);
        if !(rel <= 1e-12) {
            self.failures += 1;
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: nbisect::Error) -> String {
    e.to_string()
}

fn uniform(mesh: Mesh, times: usize, vol: &mut VolumeCheck) -> Result<Mesh, String> {
    (0..times).try_fold(mesh, |m, _| uniform_refine_with(m, vol).map_err(err))
}

fn single_simplices(n: usize) -> Result<Vec<(String, Mesh)>, String> {
    let mut out = vec![("regular".to_string(), regular_simplex_mesh(n, 1.0).map_err(err)?)];
    for seed in 0..3 {
        out.push((format!("random seed {seed}"), random_simplex_mesh(n, seed, 0.01).map_err(err)?));
    }
    Ok(out)
}

fn criterion_1() -> Outcome {
    let m = kuhn_mesh(&GridSpec::unit(4, 2)).map_err(err)?;
    ensure(m.element_count() == 384 && m.vertex_count() == 81, || {
        format!("{} elements, {} vertices", m.element_count(), m.vertex_count())
    })?;
    Ok("384 elements, 81 vertices".into())
}

fn criterion_2(vol: &mut VolumeCheck, finals: &mut Vec<Mesh>) -> Outcome {
    let mut cases = 0;
    for n in 2..=4 {
        let mut meshes = single_simplices(n)?;
        meshes.push(("kuhn k=2".into(), kuhn_mesh(&GridSpec::unit(n, 2)).map_err(err)?));
        for (name, m0) in meshes {
            let marked = mark_mesh(m0).map_err(err)?;
            let expected = (1 << n) * marked.element_count();
            let m = uniform(marked.clone(), n, vol)?;
            let tag = format!("n={n} {name}");
            ensure(m.element_count() == expected, || {
                format!("{tag}: {} elements, expected {expected}", m.element_count())
            })?;
            ensure(is_mesh_conformal(&m, &marked).map_err(err)?, || format!("{tag}: not conformal"))?;
            ensure(is_reflected(&m).map_err(err)?, || format!("{tag}: not reflected"))?;
            finals.push(m);
            cases += 1;
        }
    }
    Ok(format!("{cases} meshes doubled n times, conformal and reflected"))
}

/// Connectivity of a set of triangles as sets of vertex-index sets.
fn connectivity(mesh: &Mesh) -> (Vec<MultiId>, Vec<BTreeSet<usize>>) {
    let ids = mesh.vertices().sorted_ids();
    let cells = mesh
        .simplices()
        .map(|s| s.vertices().iter().map(|v| ids.binary_search(v).unwrap()).collect())
        .collect();
    (ids, cells)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn criterion_3() -> Outcome {
    // Tagged triangle (v0, v1, v2) with tag 2, bisected twice uniformly.
    let mut vt = VertexTable::new(2);
    for (i, p) in [[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]].iter().enumerate() {
        vt.insert(MultiId::single(i as u32), p.to_vec()).map_err(err)?;
    }
    let root = Element::Maubach(MaubachSimplex {
        simplex: Simplex::from_ids(&[0, 1, 2]).map_err(err)?,
        tag: 2,
        level: 2,
    });
    let m0 = Mesh::from_parts(vt, vec![root]).map_err(err)?;
    let mut vol = VolumeCheck::default();
    let m = uniform(m0.clone(), 2, &mut vol)?;
    // Reference mesh: vertices v0, v1, v2, then the mid-points of (v0,v2),
    // (v0,v1), (v1,v2); the root edge (v0,v2) is split first.
    let reference: BTreeSet<BTreeSet<usize>> = [[0, 4, 3], [1, 4, 3], [1, 5, 3], [2, 5, 3]]
        .iter()
        .map(|t| t.iter().copied().collect())
        .collect();
    let (ids, cells) = connectivity(&m);
    ensure(ids.len() == 6 && cells.len() == 4, || format!("{} vertices, {} triangles", ids.len(), cells.len()))?;
    let matched = permutations(6).into_iter().any(|p| {
        let relabelled: BTreeSet<BTreeSet<usize>> =
            cells.iter().map(|c| c.iter().map(|&v| p[v]).collect()).collect();
        relabelled == reference
    });
    ensure(matched, || format!("connectivity {cells:?} differs from the reference mesh"))?;
    ensure(is_mesh_conformal(&m, &m0).map_err(err)?, || "not conformal".into())?;
    // The vertex shared by all four triangles is the mid-point of the
    // tagged refinement edge (v0, v2).
    let hub = (0..ids.len()).find(|v| cells.iter().all(|c| c.contains(v)));
    let hub = hub.map(|v| m.vertices().coords(&ids[v]).unwrap().to_vec());
    ensure(hub.as_deref() == Some(&[0.25, 0.5][..]), || format!("shared vertex at {hub:?}"))?;
    Ok("4-triangle connectivity matches up to relabelling".into())
}

fn criterion_4(vol: &mut VolumeCheck) -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in 2..=4 {
        let starts = vec![
            ("regular", regular_simplex_mesh(n, 1.0).map_err(err)?),
            ("random seed 7", random_simplex_mesh(n, 7, 0.01).map_err(err)?),
        ];
        for (name, m0) in starts {
            let tag = format!("n={n} {name}");
            let mut m = mark_mesh(m0).map_err(err)?;
            let mut seq = vec![quality_stats(&m).map_err(err)?];
            for _ in 0..4 * n {
                m = uniform_refine_with(m, vol).map_err(err)?;
                seq.push(quality_stats(&m).map_err(err)?);
            }
            // With 4n iterations the only pair past the burn-in is (3n, 4n).
            let (i, a, b) = (3 * n, &seq[3 * n], &seq[4 * n]);
            ensure((a.min_q - b.min_q).abs() <= 1e-9 && (a.max_q - b.max_q).abs() <= 1e-9, || {
                format!("{tag}: iteration {i} ({}, {}) vs {} ({}, {})", a.min_q, a.max_q, i + n, b.min_q, b.max_q)
            })?;
            let plateau = seq[3 * n..].iter().map(|r| r.min_q).fold(f64::INFINITY, f64::min);
            let lowest = seq.iter().map(|r| r.min_q).fold(f64::INFINITY, f64::min);
            ensure(plateau > 0.0 && lowest >= 1e-4 * plateau, || {
                format!("{tag}: min quality {lowest} against plateau {plateau}")
            })?;
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{cases} runs periodic with period n after 3n iterations ({secs:.1} s)"))
}

fn criterion_5(vol: &mut VolumeCheck) -> Outcome {
    let start = Instant::now();
    let mut summary = Vec::new();
    for n in 2..=4usize {
        let factorial: usize = (1..=n).product();
        let bound = n * factorial * (1 << n) / 4;
        for (name, m0) in single_simplices(n)? {
            let m = uniform(mark_mesh(m0).map_err(err)?, 3 * n, vol)?;
            let c = similarity_classes(m.simplices(), m.vertices(), 1e-8).map_err(err)?;
            ensure(c <= bound, || format!("n={n} {name}: {c} classes > {bound}"))?;
            summary.push(c);
        }
        // All Kuhn simplices are congruent, so one cube is representative.
        let m = uniform(mark_mesh(kuhn_mesh(&GridSpec::unit(n, 1)).map_err(err)?).map_err(err)?, 3 * n, vol)?;
        let c = similarity_classes(m.simplices(), m.vertices(), 1e-8).map_err(err)?;
        ensure(c <= n, || format!("n={n} Kuhn: {c} classes > {n}"))?;
        summary.push(c);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("class counts {summary:?} within bounds ({secs:.1} s)"))
}

/// Kuhn mesh of the unit cube with interior vertices moved randomly by up
/// to 5% of the grid spacing per coordinate.
fn jittered_kuhn(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Mesh, String> {
    let m = kuhn_mesh(&GridSpec::unit(n, k)).map_err(err)?;
    let h = 1.0 / k as f64;
    let ids = m.vertices().sorted_ids();
    let points: Vec<Vec<f64>> = ids
        .iter()
        .map(|v| {
            let p = m.vertices().coords(v).unwrap();
            let interior = p.iter().all(|&x| x > 1e-12 && x < 1.0 - 1e-12);
            p.iter().map(|&x| if interior { x + rng.gen_range(-0.05..0.05) * h } else { x }).collect()
        })
        .collect();
    let cells: Vec<Vec<u32>> = m.simplices().map(|s| s.vertices().iter().map(|v| v.ids()[0]).collect()).collect();
    Mesh::from_cells(n, &points, &cells).map_err(err)
}

fn criterion_6(vol: &mut VolumeCheck, finals: &mut Vec<Mesh>) -> Outcome {
    let start = Instant::now();
    let options = RefineOptions::default();
    let mut steps = 0;
    for (n, k) in [(2, 5), (3, 2), (4, 2)] {
        for campaign in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * n as u64 + campaign);
            let m0 = mark_mesh(jittered_kuhn(n, k, &mut rng)?).map_err(err)?;
            let q = m0.simplices().map(|s| shape_quality(s, m0.vertices()).unwrap()).fold(1.0, f64::min);
            ensure(q > 0.0, || format!("n={n}: degenerate jittered mesh"))?;
            let mut m = m0.clone();
            for it in 0..5 {
                let count = (m.element_count() as f64 * 0.1).ceil() as usize;
                let set = select_random(&m, &mut rng, count);
                let out = local_refine_with(m, &set, &options, vol).map_err(err)?;
                m = out.mesh;
                let tag = format!("n={n} campaign {campaign} iteration {it}");
                ensure(out.closure_rounds < options.max_closure_rounds, || format!("{tag}: closure cap hit"))?;
                ensure(is_mesh_conformal(&m, &m0).map_err(err)?, || format!("{tag}: not conformal"))?;
                ensure(get_non_conformal_simplices(&m).is_empty(), || format!("{tag}: hanging vertices"))?;
                steps += 1;
            }
            finals.push(m);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{steps} refinement steps conformal ({secs:.1} s)"))
}

fn criterion_7(vol: &mut VolumeCheck, finals: &mut Vec<Mesh>) -> Outcome {
    let start = Instant::now();
    let center = [0.5; 4];
    let (radius, axis) = (0.25, 0);
    let half = Some(Halfspace { axis, bound: 0.5 });
    let mut m = mark_mesh(kuhn_mesh(&GridSpec::unit(4, 2)).map_err(err)?).map_err(err)?;
    let uniform_count = m.element_count() << 6;
    for _ in 0..6 {
        let set = select_by_hypersphere(&m, &center, radius, half).map_err(err)?;
        m = local_refine_with(m, &set, &RefineOptions::default(), vol).map_err(err)?.mesh;
    }
    let (mut near, mut far) = ((0.0, 0usize), (0.0, 0usize));
    for s in m.simplices() {
        let pts = m.points(s).map_err(err)?;
        let centroid: Vec<f64> = (0..4).map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64).collect();
        let d = simplex_diameter(s, &m).map_err(err)?;
        let acc = if distance_to_hemisphere(&centroid, &center, radius, axis) <= 0.1 { &mut near } else { &mut far };
        acc.0 += d;
        acc.1 += 1;
    }
    let (mn, mf) = (near.0 / near.1 as f64, far.0 / far.1 as f64);
    let secs = start.elapsed().as_secs_f64();
    let count = m.element_count();
    finals.push(m);
    let summary = format!(
        "{count} elements = {:.1}% of uniform {uniform_count} (limit 25%); mean diameter {mn:.4} within 0.1 of H \
         vs {mf:.4} elsewhere, ratio {:.3} (limit 0.5); {secs:.1} s",
        100.0 * count as f64 / uniform_count as f64,
        mn / mf
    );
    let pass = 4 * count < uniform_count && near.1 > 0 && far.1 > 0 && mn < 0.5 * mf && secs < 300.0;
    if pass {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn criterion_8() -> Outcome {
    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![-1.0, 0.5]];
    let over = Mesh::from_cells(2, &pts, &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]).map_err(err)?;
    ensure(get_faces(&over).is_err(), || "over-shared face accepted".into())?;

    let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    let m0 = mark_mesh(Mesh::from_cells(2, &square, &[vec![0, 1, 2], vec![1, 3, 2]]).map_err(err)?).map_err(err)?;
    let hanging = bisect_simplices(m0.clone(), &[0].into_iter().collect::<RefinementSet>()).map_err(err)?;
    ensure(!get_non_conformal_simplices(&hanging).is_empty(), || "no hanging vertex was created".into())?;
    ensure(!is_mesh_conformal(&hanging, &m0).map_err(err)?, || "hanging vertex accepted".into())?;

    let permuted = Mesh::from_cells(2, &square, &[vec![1, 2, 0], vec![2, 1, 3]]).map_err(err)?;
    ensure(!is_reflected(&permuted).map_err(err)?, || "permuted neighbours accepted".into())?;
    Ok("error / false / false".into())
}

fn criterion_9(vol: &VolumeCheck) -> Outcome {
    ensure(vol.bisections >= 10_000, || format!("only {} bisections observed", vol.bisections))?;
    ensure(vol.failures == 0, || format!("{} of {} bisections off, worst {:.2e}", vol.failures, vol.bisections, vol.worst))?;
    Ok(format!("{} bisections, worst relative error {:.2e}", vol.bisections, vol.worst))
}

fn criterion_10(finals: &[Mesh]) -> Outcome {
    for (i, m) in finals.iter().enumerate() {
        let text = write_mesh_string(m).map_err(err)?;
        let back = read_mesh_str(&text).map_err(err)?;
        ensure(&back == m, || format!("mesh {i} changed in the round trip"))?;
        ensure(write_mesh_string(&back).map_err(err)? == text, || format!("mesh {i} text not stable"))?;
    }
    ensure(finals.len() == 15 + 60 + 1, || format!("{} final meshes", finals.len()))?;
    Ok(format!("{} meshes identical after write/read", finals.len()))
}

fn main() -> ExitCode {
    let mut vol = VolumeCheck::default();
    let mut finals = Vec::new();
    let mut results: Vec<Outcome> = Vec::new();
    let mut run = |r: Outcome| {
        let i = results.len() + 1;
        match &r {
            Ok(msg) => println!("criterion {i:>2}: PASS  {msg}"),
            Err(msg) => println!("criterion {i:>2}: FAIL  {msg}"),
        }
        results.push(r);
    };
    run(criterion_1());
    run(criterion_2(&mut vol, &mut finals));
    run(criterion_3());
    run(criterion_4(&mut vol));
    run(criterion_5(&mut vol));
    run(criterion_6(&mut vol, &mut finals));
    run(criterion_7(&mut vol, &mut finals));
    run(criterion_8());
    run(criterion_9(&vol));
    run(criterion_10(&finals));
    let failed = results.iter().filter(|r| r.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
