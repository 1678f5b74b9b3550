//! Acceptance checks. Each test prints one `PASS`/`FAIL` line with the
//! measured quantity before asserting.

use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use volseg::distance::{boundary_set, rebuild_sdf, SignedDistanceField};
use volseg::io::{self, PipelineConfig, VolumeHeader};
use volseg::levelset::{evolve, evolve_step, region_stats, EvolutionParams};
use volseg::mesh::marching_cubes;
use volseg::metrics::compare;
use volseg::phantom::PhantomSpec;
use volseg::pipeline::{
    bench_phantom, run_bench, run_segment, segment_volume, BenchArgs, SeedMethod, SegmentArgs,
};
use volseg::volume::{Dims, LabelMask, Volume, VoxelIndex};

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "criterion {id:>2} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Union of 2 to 5 random balls inside a 32^3 grid.
fn random_blob(seed: u64) -> LabelMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 + (rng.next_u32() % 4) as usize;
    let balls: Vec<([f64; 3], f64)> = (0..n)
        .map(|_| {
            let r = uniform(&mut rng, 3.0, 8.0);
            let c = [0; 3].map(|_| uniform(&mut rng, 4.0 + r, 27.0 - r));
            (c, r)
        })
        .collect();
    LabelMask::from_fn([32, 32, 32], |p| {
        balls.iter().any(|(c, r)| {
            (p.i as f64 - c[0]).powi(2) + (p.j as f64 - c[1]).powi(2) + (p.k as f64 - c[2]).powi(2)
                <= r * r
        })
    })
}

/// Signed Euclidean distance to the nearest boundary voxel by exhaustive
/// search, negative inside.
fn brute_force_sdf(mask: &LabelMask) -> Vec<f64> {
    let dims = mask.dims();
    let boundary: Vec<[f64; 3]> = boundary_set(mask)
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(l, _)| {
            let p = VoxelIndex::from_linear(l, dims);
            [p.i as f64, p.j as f64, p.k as f64]
        })
        .collect();
    (0..mask.data().len())
        .map(|l| {
            let p = VoxelIndex::from_linear(l, dims);
            let (x, y, z) = (p.i as f64, p.j as f64, p.k as f64);
            let d2 = boundary
                .iter()
                .map(|b| (x - b[0]).powi(2) + (y - b[1]).powi(2) + (z - b[2]).powi(2))
                .fold(f64::INFINITY, f64::min);
            if mask.data()[l] {
                -d2.sqrt()
            } else {
                d2.sqrt()
            }
        })
        .collect()
}

#[test]
fn criterion_01_distance_accuracy() {
    let masks: Vec<LabelMask> = (0..20).map(random_blob).collect();
    let clock = Instant::now();
    let fields: Vec<SignedDistanceField> = masks.iter().map(|m| rebuild_sdf(m).unwrap()).collect();
    let elapsed = clock.elapsed().as_secs_f64();

    let (mut within, mut total) = (0usize, 0usize);
    let mut worst = 0.0f64;
    for (m, f) in masks.iter().zip(&fields) {
        let exact = brute_force_sdf(m);
        for (&e, &p) in exact.iter().zip(f.phi()) {
            if e.abs() <= 10.0 {
                total += 1;
                let err = (p - e).abs();
                worst = worst.max(err);
                within += (err <= 1.0) as usize;
            }
        }
    }
    let frac = within as f64 / total as f64;
    let ok = frac >= 0.99 && elapsed < 5.0;
    report(
        1,
        "distance accuracy",
        ok,
        format!(
            "{:.4}% within 1 voxel, worst {worst:.3}, {elapsed:.3}s",
            100.0 * frac
        ),
    );
    assert!(ok);
}

/// Godunov upwind gradient magnitude of `|phi|` at an interior voxel.
fn upwind_gradient(mag: &[f64], dims: Dims, p: VoxelIndex) -> f64 {
    let l = p.linear(dims);
    let strides = [1, dims[0], dims[0] * dims[1]];
    let mut s = 0.0;
    for st in strides {
        let lo = mag[l - st].min(mag[l + st]);
        let d = (mag[l] - lo).max(0.0);
        s += d * d;
    }
    s.sqrt()
}

#[test]
fn criterion_02_eikonal_residual() {
    let band = EvolutionParams::default().band_width;
    let mut residuals = Vec::new();
    for seed in 0..20 {
        let m = random_blob(seed);
        let f = rebuild_sdf(&m).unwrap();
        let dims = m.dims();
        let mag: Vec<f64> = f.phi().iter().map(|p| p.abs()).collect();
        // skip the exactly initialized shell: boundary voxels and their 26-neighbors
        let shell: Vec<bool> = {
            let b = boundary_set(&m);
            (0..b.len())
                .map(|l| {
                    let p = VoxelIndex::from_linear(l, dims);
                    volseg::volume::neighbors(p, volseg::volume::Connectivity::Full26, dims)
                        .iter()
                        .any(|q| b[q.linear(dims)])
                        || b[l]
                })
                .collect()
        };
        for l in 0..mag.len() {
            let p = VoxelIndex::from_linear(l, dims);
            if shell[l] || mag[l] > band || volseg::volume::on_border(p, dims) {
                continue;
            }
            residuals.push((upwind_gradient(&mag, dims, p) - 1.0).abs());
        }
    }
    residuals.sort_by(f64::total_cmp);
    let median = residuals[residuals.len() / 2];
    let ok = median <= 0.1;
    report(
        2,
        "eikonal residual",
        ok,
        format!("median {median:.4} over {} voxels", residuals.len()),
    );
    assert!(ok);
}

fn sphere_sdf(dims: Dims, c: f64, r: f64) -> SignedDistanceField {
    SignedDistanceField::from_fn(dims, |p| {
        ((p.i as f64 - c).powi(2) + (p.j as f64 - c).powi(2) + (p.k as f64 - c).powi(2)).sqrt() - r
    })
}

/// Mean distance from `(c, c, c)` of the interpolated zero crossings on grid edges.
fn zero_crossing_radius(field: &SignedDistanceField, c: f64) -> f64 {
    let dims = field.dims();
    let phi = field.phi();
    let (mut sum, mut n) = (0.0, 0usize);
    for (l, &a) in phi.iter().enumerate() {
        let p = VoxelIndex::from_linear(l, dims);
        for axis in 0..3 {
            let mut q = p.as_array();
            q[axis] += 1;
            if q[axis] >= dims[axis] {
                continue;
            }
            let b = field.get(VoxelIndex::from(q));
            if (a <= 0.0) != (b <= 0.0) {
                let mut pos = [p.i as f64, p.j as f64, p.k as f64];
                pos[axis] += a / (a - b);
                sum += ((pos[0] - c).powi(2) + (pos[1] - c).powi(2) + (pos[2] - c).powi(2)).sqrt();
                n += 1;
            }
        }
    }
    sum / n as f64
}

#[test]
fn criterion_03_curvature_flow_rate() {
    let (dims, c, r0) = ([48, 48, 48], 23.5, 8.0);
    let params = EvolutionParams {
        alpha: 1.0,
        beta: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        dt: 0.1,
        ..Default::default()
    };
    let steps = 50;
    let volume = Volume::filled(dims, 0.5);
    let mut field = sphere_sdf(dims, c, r0);
    let start = zero_crossing_radius(&field, c);
    for _ in 0..steps {
        let stats = region_stats(&volume, &field).unwrap();
        field = evolve_step(&volume, &field, &params, &stats).unwrap().0;
    }
    let end = zero_crossing_radius(&field, c);
    let t = steps as f64 * params.dt;
    let measured = (start - end) / t;
    // dR/dt = -2 alpha / R integrates to R(t) = sqrt(R0^2 - 4 alpha t)
    let expected = (start - (start * start - 4.0 * params.alpha * t).sqrt()) / t;
    let rel = (measured - expected).abs() / expected;
    let ok = rel <= 0.25;
    report(
        3,
        "curvature flow",
        ok,
        format!(
            "rate {measured:.4} vs {expected:.4} (2a/R0 = {:.4}), rel err {rel:.3}",
            2.0 * params.alpha / r0
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_04_stationarity() {
    let spec = PhantomSpec::sphere(40, 10.0, 0.0, 11);
    let (volume, truth) = spec.generate().unwrap();
    let params = EvolutionParams {
        alpha: 0.0,
        beta: 0.0,
        gamma1: 1.0,
        gamma2: 1.0,
        ..Default::default()
    };
    let evo = evolve(&volume, &rebuild_sdf(&truth).unwrap(), &params).unwrap();
    let mask = evo.field.to_mask();
    let diff = mask
        .data()
        .iter()
        .zip(truth.data())
        .filter(|(a, b)| a != b)
        .count();
    let ok = diff == 0 && evo.converged;
    report(
        4,
        "stationarity",
        ok,
        format!(
            "{diff} voxels changed, {} iterations, converged {}",
            evo.iterations, evo.converged
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_05_phantom_recovery() {
    let config = PipelineConfig::default();
    let sphere = PhantomSpec::sphere(64, 16.0, 0.1, 2024);
    let (volume, truth) = sphere.generate().unwrap();
    let clock = Instant::now();
    let seg = segment_volume(
        &volume,
        sphere.geometry.interior_point(),
        &config,
        SeedMethod::Cluster,
        Some(&truth),
        "sphere",
    )
    .unwrap();
    let t_sphere = clock.elapsed().as_secs_f64();
    let a = seg.report.agreement.unwrap();

    let tube = PhantomSpec::bent_tube(64, 4.0, 0.1, 2024);
    let (tvol, ttruth) = tube.generate().unwrap();
    let clock = Instant::now();
    let tseg = segment_volume(
        &tvol,
        tube.geometry.interior_point(),
        &config,
        SeedMethod::Cluster,
        Some(&ttruth),
        "tube",
    )
    .unwrap();
    let t_tube = clock.elapsed().as_secs_f64();
    let b = tseg.report.agreement.unwrap();

    let ok =
        a.dice >= 0.95 && a.overlap >= 0.95 && b.dice >= 0.85 && t_sphere < 60.0 && t_tube < 60.0;
    report(
        5,
        "phantom recovery",
        ok,
        format!(
            "sphere dice {:.4} overlap {:.4} {}it {t_sphere:.2}s; tube dice {:.4} {}it {t_tube:.2}s",
            a.dice, a.overlap, seg.report.iterations, b.dice, tseg.report.iterations
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_seeding_speedup() {
    let spec = PhantomSpec::sphere(64, 16.0, 0.1, 2024);
    let table = bench_phantom(&spec, &PipelineConfig::default()).unwrap();
    let a = table.row(SeedMethod::Cluster).unwrap();
    let b = table.row(SeedMethod::Sphere).unwrap();
    let (da, db) = (a.agreement.unwrap().dice, b.agreement.unwrap().dice);
    let ok =
        a.converged && b.converged && 2 * a.iterations <= b.iterations && da >= 0.93 && db >= 0.93;
    report(
        6,
        "seeding speedup",
        ok,
        format!(
            "cluster {} it dice {da:.4}; sphere {} it dice {db:.4}",
            a.iterations, b.iterations
        ),
    );
    print!("{}", table.to_text());
    assert!(ok);
}

#[test]
fn criterion_07_mesh_validity() {
    let (c, r) = (19.5, 12.0);
    let mesh = marching_cubes(&sphere_sdf([40, 40, 40], c, r)).unwrap();
    let worst = mesh
        .vertices
        .iter()
        .map(|v| (((v[0] - c).powi(2) + (v[1] - c).powi(2) + (v[2] - c).powi(2)).sqrt() - r).abs())
        .fold(0.0, f64::max);
    let area_err = (mesh.surface_area() - 4.0 * PI * r * r).abs() / (4.0 * PI * r * r);
    let chi = mesh.euler_characteristic();
    let ok = mesh.is_watertight() && chi == 2 && worst <= 0.5 && area_err <= 0.05;
    report(
        7,
        "mesh validity",
        ok,
        format!(
            "watertight {}, chi {chi}, radius err {worst:.4}, area err {:.3}%",
            mesh.is_watertight(),
            100.0 * area_err
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_metric_identities() {
    let d = [10, 10, 2];
    let a = LabelMask::from_fn(d, |p| p.k == 0);
    let b = LabelMask::from_fn(d, |p| p.k == 1);
    let half = LabelMask::from_fn(d, |p| p.k == 0 && p.j < 5);
    let same = compare(&a, &a).unwrap();
    let disjoint = compare(&a, &b).unwrap();
    let nested = compare(&a, &half).unwrap();
    let mut ok = (same.dice, same.overlap) == (1.0, 1.0)
        && (disjoint.dice, disjoint.overlap) == (0.0, 0.0)
        && nested.dice == 2.0 / 3.0
        && nested.overlap == 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations = 0;
    for _ in 0..1000 {
        // varying densities exercise both balanced and lopsided pairs
        let (pa, pb) = (uniform(&mut rng, 0.05, 0.95), uniform(&mut rng, 0.05, 0.95));
        let x = LabelMask::from_fn([8, 8, 8], |_| uniform(&mut rng, 0.0, 1.0) < pa);
        let y = LabelMask::from_fn([8, 8, 8], |_| uniform(&mut rng, 0.0, 1.0) < pb);
        if x.is_empty() && y.is_empty() {
            continue;
        }
        let r = compare(&x, &y).unwrap();
        violations += (r.dice > r.overlap) as usize;
    }
    ok &= violations == 0;
    report(
        8,
        "metric identities",
        ok,
        format!("examples exact, {violations} dice > overlap in 1000 pairs"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path();
    let spec = PhantomSpec::sphere(48, 12.0, 0.1, 99);
    volseg::pipeline::run_phantom(&spec, &base.join("ph")).unwrap();
    fs::write(
        base.join("spec.json"),
        serde_json::to_string(&spec).unwrap(),
    )
    .unwrap();

    let seg = |prefix: &str| {
        let args = SegmentArgs {
            volume: base.join("ph_volume.raw"),
            header: base.join("ph_volume.json"),
            seed: spec.geometry.interior_point(),
            config: None,
            out_prefix: base.join(prefix),
            truth: Some(base.join("ph_truth.raw")),
            label: "sphere".into(),
        };
        run_segment(&args).unwrap();
        let report: serde_json::Value =
            serde_json::from_slice(&fs::read(base.join(format!("{prefix}_report.json"))).unwrap())
                .unwrap();
        let mut report = report;
        report.as_object_mut().unwrap().remove("timings");
        (
            fs::read(base.join(format!("{prefix}_mask.raw"))).unwrap(),
            fs::read(base.join(format!("{prefix}_mesh.obj"))).unwrap(),
            report,
        )
    };
    let first = seg("a");
    let second = seg("b");
    let segment_same = first == second;

    let bench = |name: &str| {
        let out = base.join(name);
        run_bench(&BenchArgs {
            spec: base.join("spec.json"),
            config: None,
            out: out.clone(),
        })
        .unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
        for row in v["rows"].as_array_mut().unwrap() {
            row["report"].as_object_mut().unwrap().remove("timings");
        }
        v
    };
    let bench_same = bench("b1.json") == bench("b2.json");
    let ok = segment_same && bench_same;
    report(
        9,
        "determinism",
        ok,
        format!("segment identical {segment_same}, bench identical {bench_same}"),
    );
    assert!(ok);
}

/// Hand-computed PPM for a 4x4 slice with values `(i + 4 j) / 15` (gray
/// levels `17 (i + 4 j)`) and the diagonal masked.
const SLICE_FIXTURE: &[u8] = &[
    b'P', b'6', b'\n', b'4', b' ', b'4', b'\n', b'2', b'5', b'5', b'\n', 0, 0, 255, 17, 17, 17, 34,
    34, 34, 51, 51, 51, 68, 68, 68, 42, 42, 255, 102, 102, 102, 119, 119, 119, 136, 136, 136, 153,
    153, 153, 85, 85, 255, 187, 187, 187, 204, 204, 204, 221, 221, 221, 238, 238, 238, 127, 127,
    255,
];

#[test]
fn criterion_10_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let d = [7, 5, 3];
    let values: Vec<f64> = (0..105)
        .map(|_| f32::from_bits(rng.next_u32() & 0x7f7f_ffff) as f64)
        .collect();
    let volume = Volume::new(d, [0.5, 1.0, 1.5], values).unwrap();
    let (raw, hdr) = (base.join("v.raw"), base.join("v.json"));
    io::write_volume(&volume, &raw, &hdr).unwrap();
    let (raw_bytes, hdr_bytes) = (fs::read(&raw).unwrap(), fs::read(&hdr).unwrap());
    let back = io::read_volume(&raw, &hdr).unwrap();
    io::write_volume(&back, &raw, &hdr).unwrap();
    let volume_ok = back == volume
        && fs::read(&raw).unwrap() == raw_bytes
        && fs::read(&hdr).unwrap() == hdr_bytes;
    let header_ok = VolumeHeader::from_json(std::str::from_utf8(&hdr_bytes).unwrap())
        .unwrap()
        .to_json()
        .as_bytes()
        == hdr_bytes;

    let mask = LabelMask::from_fn(d, |_| rng.next_u32() % 3 == 0);
    let (mraw, mhdr) = (base.join("m.raw"), base.join("m.json"));
    io::write_mask(&mask, &mraw, &mhdr).unwrap();
    let mask_ok = io::read_mask(&mraw, &mhdr).unwrap() == mask;

    let sd = [4, 4, 1];
    let slice_vol = Volume::from_fn(sd, |p| (p.i + 4 * p.j) as f64 / 15.0);
    let diag = LabelMask::from_fn(sd, |p| p.i == p.j);
    let ppm_path = base.join("s.ppm");
    io::export_slice(&slice_vol, Some(&diag), io::Axis::Z, 0, &ppm_path).unwrap();
    let ppm_ok = fs::read(&ppm_path).unwrap() == SLICE_FIXTURE;

    let ok = volume_ok && header_ok && mask_ok && ppm_ok;
    report(
        10,
        "round trips",
        ok,
        format!("volume {volume_ok}, header {header_ok}, mask {mask_ok}, ppm {ppm_ok}"),
    );
    assert!(ok);
}
