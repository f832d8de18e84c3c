"""Command-line front end.

Subcommands:
  simulate  batch channel synthesis over seeds -> realization CSVs + PDAP files
  analyze   cluster PDAP files and extract channel characteristics + fits
  cluster   cluster one PDAP file and write the per-MPC report
  compare   RMSE/SSIM between paired reference and candidate PDAP files

Exit codes: 0 ok, 1 partial (some inputs failed), 2 fatal.  Fatal errors print
one machine-parseable line to stderr: ``error: <stage>: <message>``.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    characteristics_from_clusters,
    characteristics_from_csv,
    characteristics_to_csv,
    correlation_matrix,
    fit_ci,
    fit_lognormal,
    fspl,
)
from .clustering import cluster_report_csv, dbscan_mcd_arrays, match_clusters
from .config import ConfigError, ScenarioConfig, load_config
from .hybrid import realization_to_csv, synthesize_channel
from .metrics import empirical_cdf, metric_report
from .pdap import PdapFormatError, clip_below_floor, rasterize_arrays, read_pdap, write_pdap
from .raytrace import enumerate_images

OK, PARTIAL, FATAL = 0, 1, 2


def _fatal(stage: str, message: str) -> int:
    print(f"error: {stage}: {message}", file=sys.stderr)
    return FATAL


def _config_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _simulate_one(args):
    cfg_path, out_dir, seed, mode, plots = args
    cfg = load_config(cfg_path)
    real = synthesize_channel(cfg.scene, cfg.params, mode, seed)
    out_dir = Path(out_dir)
    real_csv = out_dir / f"realization_{seed:05d}.csv"
    pdap_csv = out_dir / f"pdap_{seed:05d}.csv"
    realization_to_csv(real, real_csv)
    inside = (real.toa >= 0) & (real.toa < cfg.grid.max_delay)
    grid = clip_below_floor(
        rasterize_arrays(real.toa[inside], real.aoa[inside], real.power[inside], cfg.grid))
    write_pdap(grid, pdap_csv)
    if plots:
        from .plots import save_pdap_heatmap
        save_pdap_heatmap(grid, out_dir / f"pdap_{seed:05d}.png",
                          title=f"PDAP seed {seed} ({mode})")
    return str(real_csv), str(pdap_csv)


def cmd_simulate(ns) -> int:
    try:
        cfg = load_config(ns.config)
    except (ConfigError, OSError, ValueError) as e:
        return _fatal("config", str(e))
    mode = ns.mode or cfg.mode
    out_dir = Path(ns.out or cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    plots = ns.plots or cfg.output.plots
    seeds = [cfg.master_seed + k for k in range(ns.seeds)]
    jobs = [(ns.config, str(out_dir), seed, mode, plots) for seed in seeds]
    try:
        if ns.workers > 1:
            with ProcessPoolExecutor(max_workers=ns.workers) as pool:
                results = list(pool.map(_simulate_one, jobs))
        else:
            results = [_simulate_one(j) for j in jobs]
    except Exception as e:  # config validated above; treat synth errors as fatal
        return _fatal("simulate", str(e))
    manifest = {
        "tool": "thzchan",
        "version": __version__,
        "command": "simulate",
        "config_path": str(ns.config),
        "config_sha256": _config_sha256(ns.config),
        "mode": mode,
        "master_seed": cfg.master_seed,
        "seeds": seeds,
        "files": {str(s): {"realization": r, "pdap": p}
                  for s, (r, p) in zip(seeds, results)},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"simulate: wrote {len(results)} realization(s) to {out_dir}")
    return OK


def _analyze_grid(grid, cfg: ScenarioConfig, rx_id: str):
    thr = cfg.clustering.threshold_dbm
    dbm = grid.to_dbm()
    ii, jj = np.nonzero(dbm >= thr)
    toa_ns = ii * grid.spec.delta_tau * 1e9
    aoa = jj * grid.spec.delta_theta
    power = grid.power[ii, jj]
    if toa_ns.size == 0:
        raise ValueError("no MPCs above the clustering threshold")
    mcd_cfg = cfg.clustering.mcd()
    cset = dbscan_mcd_arrays(toa_ns, aoa, power, cfg.clustering.eps,
                             cfg.clustering.min_points, mcd_cfg)
    paths = enumerate_images(cfg.scene, cfg.params.max_order,
                             cap_to_paper=cfg.params.cap_to_paper)
    cset = match_clusters(cset, paths, mcd_cfg, cfg.clustering.eps)
    row = characteristics_from_clusters(cset, cfg.scene.tx_rx_distance, rx_id=rx_id)
    return cset, row


def cmd_analyze(ns) -> int:
    try:
        cfg = load_config(ns.config)
    except (ConfigError, OSError, ValueError) as e:
        return _fatal("config", str(e))
    out_dir = Path(ns.out or cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    plots = ns.plots or cfg.output.plots

    rows = []
    pl_samples = []     # (distance, path loss dB) per successfully analyzed PDAP
    failures = 0
    if ns.characteristics:
        try:
            rows = characteristics_from_csv(ns.characteristics)
        except (OSError, ValueError) as e:
            return _fatal("characteristics", str(e))
    else:
        files = sorted(glob.glob(ns.pdap_glob)) if ns.pdap_glob else []
        if not files:
            return _fatal("usage", f"no PDAP files match {ns.pdap_glob!r}")
        for fp in files:
            stem = Path(fp).stem
            try:
                grid = read_pdap(fp)
                cset, row = _analyze_grid(grid, cfg, rx_id=stem)
            except (PdapFormatError, ValueError) as e:
                print(f"warning: skipping {fp}: {e}", file=sys.stderr)
                failures += 1
                continue
            rows.append(row)
            total_rx_w = float(grid.power.sum())
            if total_rx_w > 0:
                # conventional path loss: antenna gains de-embedded (boresight Tx)
                pl_samples.append(
                    (row.d, 10.0 * np.log10(cfg.params.tx_power_w / total_rx_w)
                     + cfg.params.tx_peak_gain_db))
            cluster_report_csv(cset, out_dir / f"clusters_{stem}.csv")
            if plots:
                from .plots import save_cluster_scatter
                save_cluster_scatter(cset, out_dir / f"clusters_{stem}.png",
                                     title=f"Clusters: {stem}")
        if not rows:
            return _fatal("analyze", "all PDAP files failed")

    characteristics_to_csv(rows, out_dir / "characteristics.csv")
    _write_fit_report(rows, pl_samples, cfg, out_dir)
    print(f"analyze: {len(rows)} row(s), {failures} failure(s), reports in {out_dir}")
    return OK if failures == 0 else PARTIAL


def _write_fit_report(rows, pl_samples, cfg: ScenarioConfig, out_dir: Path) -> None:
    """Aggregate sections: CI path-loss fit, log-normal fits, correlation
    matrix; the correlation heatmap and path-loss figure render alongside."""
    lines = ["section,name,value"]
    freq = cfg.scene.carrier_frequency

    if len({d for d, _ in pl_samples}) >= 2:
        ci = fit_ci(pl_samples, frequency_hz=freq)
        lines.append(f"ci,ple,{ci.ple:.6f}")
        lines.append(f"ci,sigma_sf_db,{ci.sigma_sf_db:.6f}")
        lines.append(f"ci,d0_m,{ci.d0:.6f}")
        lines.append(f"ci,fspl_d0_db,{fspl(ci.d0, freq):.6f}")
        from .plots import save_pathloss_fit
        d = np.array([s[0] for s in pl_samples])
        pl = np.array([s[1] for s in pl_samples])
        save_pathloss_fit(d, pl, ci, freq, out_dir / "pathloss_fit.png")
    for name, getter in (("n_clusters", lambda r: r.n_clusters),
                         ("k_factor", lambda r: r.k_factor),
                         ("ds_ns", lambda r: r.ds_ns),
                         ("as_deg", lambda r: r.as_deg),
                         ("r_w", lambda r: r.r_w)):
        vals = [getter(r) for r in rows if np.isfinite(getter(r)) and getter(r) > 0]
        dropped = len(rows) - len(vals)
        if len(vals) >= 2:
            mu, sigma = fit_lognormal(vals)
            lines.append(f"lognormal,mu_ln_{name},{mu:.6f}")
            lines.append(f"lognormal,sigma_ln_{name},{sigma:.6f}")
            lines.append(f"lognormal,excluded_{name},{dropped}")
    if len(rows) >= 3:
        corr = correlation_matrix(rows)
        for i, a in enumerate(corr.labels):
            for j, b in enumerate(corr.labels):
                if j <= i:
                    continue
                lines.append(f"correlation,rho_{a}_{b},{corr.matrix[i, j]:.6f}")
        lines.append(f"correlation,rows_used,{corr.n_rows}")
        lines.append(f"correlation,values_excluded,{corr.n_excluded}")
        from .plots import save_correlation_heatmap
        save_correlation_heatmap(corr.matrix, corr.labels, out_dir / "correlation.png")
    (out_dir / "fit_report.csv").write_text("\n".join(lines) + "\n")


def cmd_cluster(ns) -> int:
    try:
        cfg = load_config(ns.config)
    except (ConfigError, OSError, ValueError) as e:
        return _fatal("config", str(e))
    out_dir = Path(ns.out or cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        grid = read_pdap(ns.pdap)
        cset, row = _analyze_grid(grid, cfg, rx_id=Path(ns.pdap).stem)
    except (PdapFormatError, OSError, ValueError) as e:
        return _fatal("cluster", str(e))
    stem = Path(ns.pdap).stem
    cluster_report_csv(cset, out_dir / f"clusters_{stem}.csv")
    if ns.plots or cfg.output.plots:
        from .plots import save_cluster_scatter
        save_cluster_scatter(cset, out_dir / f"clusters_{stem}.png",
                             title=f"Clusters: {stem}")
    n_matched = sum(1 for c in cset.clusters if c.match_status == "matched")
    print(f"cluster: {len(cset.clusters)} cluster(s) ({n_matched} matched), "
          f"{cset.outliers.size} outlier(s); report in {out_dir}")
    return OK


def cmd_compare(ns) -> int:
    refs = sorted(glob.glob(ns.reference_glob))
    cands = sorted(glob.glob(ns.candidate_glob))
    if not refs or not cands:
        return _fatal("usage", "reference and candidate globs must each match at least one file")
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_pairs = min(len(refs), len(cands))
    unpaired = [*refs[n_pairs:], *cands[n_pairs:]]
    for fp in unpaired:
        print(f"warning: unpaired file {fp}", file=sys.stderr)

    rows, rmses, ssims = [], [], []
    failures = 0
    for ref_fp, cand_fp in zip(refs[:n_pairs], cands[:n_pairs]):
        pair_id = f"{Path(ref_fp).stem}__{Path(cand_fp).stem}"
        try:
            rep = metric_report(read_pdap(ref_fp), read_pdap(cand_fp))
        except (PdapFormatError, ValueError) as e:
            print(f"warning: skipping pair {pair_id}: {e}", file=sys.stderr)
            failures += 1
            continue
        rows.append(f"{pair_id},{rep.rmse_db:.6f},{rep.ssim:.6f}")
        rmses.append(rep.rmse_db)
        ssims.append(rep.ssim)
    if not rows:
        return _fatal("compare", "all pairs failed")

    (out_dir / "metrics.csv").write_text("pair_id,rmse_db,ssim\n" + "\n".join(rows) + "\n")
    cdf_lines = ["metric,value,quantile"]
    for name, vals in (("rmse_db", rmses), ("ssim", ssims)):
        for v, q in empirical_cdf(vals):
            cdf_lines.append(f"{name},{v:.6f},{q:.6f}")
    (out_dir / "metrics_cdf.csv").write_text("\n".join(cdf_lines) + "\n")
    (out_dir / "summary.csv").write_text(
        "metric,mean,n\n"
        f"rmse_db,{np.mean(rmses):.6f},{len(rmses)}\n"
        f"ssim,{np.mean(ssims):.6f},{len(ssims)}\n"
    )
    from .plots import save_cdf
    save_cdf({"RMSE": np.array(rmses)}, out_dir / "rmse_cdf.png", "RMSE (dB)")
    save_cdf({"SSIM": np.array(ssims)}, out_dir / "ssim_cdf.png", "SSIM")
    print(f"compare: {len(rows)} pair(s), mean RMSE {np.mean(rmses):.2f} dB, "
          f"mean SSIM {np.mean(ssims):.3f}; reports in {out_dir}")
    return OK if failures == 0 and not unpaired else PARTIAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="thzchan",
        description="Hybrid ray-tracing/statistical indoor THz channel toolkit",
    )
    ap.add_argument("--version", action="version", version=f"thzchan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize channels over a seed batch")
    sim.add_argument("config", help="scenario config file")
    sim.add_argument("--seeds", type=int, default=1, help="number of realizations")
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--mode", choices=["hybrid", "statistical_baseline"], default=None)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--plots", action="store_true", help="render PDAP heatmaps")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="cluster PDAPs and extract characteristics")
    ana.add_argument("pdap_glob", nargs="?", default=None, help="glob of PDAP files")
    ana.add_argument("--config", required=True)
    ana.add_argument("--out", default=None)
    ana.add_argument("--characteristics", default=None,
                     help="skip clustering; aggregate a characteristics CSV directly")
    ana.add_argument("--plots", action="store_true")
    ana.set_defaults(func=cmd_analyze)

    clu = sub.add_parser("cluster", help="cluster a single PDAP file")
    clu.add_argument("pdap", help="PDAP file")
    clu.add_argument("--config", required=True)
    clu.add_argument("--out", default=None)
    clu.add_argument("--plots", action="store_true")
    clu.set_defaults(func=cmd_cluster)

    cmp_ = sub.add_parser("compare", help="RMSE/SSIM between paired PDAP sets")
    cmp_.add_argument("reference_glob")
    cmp_.add_argument("candidate_glob")
    cmp_.add_argument("--out", required=True)
    cmp_.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> None:
    ns = build_parser().parse_args(argv)
    if ns.command == "analyze" and not ns.pdap_glob and not ns.characteristics:
        sys.exit(_fatal("usage", "analyze needs a PDAP glob or --characteristics"))
    sys.exit(ns.func(ns))


if __name__ == "__main__":
    main()
