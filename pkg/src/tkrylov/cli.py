"""Command-line front end: ``degrade``, ``restore``, ``validate`` and ``bench``.

Settings come from built-in defaults, then an optional ``key = value`` config
file (``--config``), then command-line flags. Exit codes: 0 success, 2
configuration or input error, 3 numerical failure.
"""

import argparse
import dataclasses
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import imaging
from .operators import BlurModel, build_cross_channel_blur, build_within_channel_video_blur
from .solvers import GgkbConfig, GmresConfig, NumericalError, ggkb_tikhonov, gmres_restarted
from .tensor_core import load_t3, save_t3

log = logging.getLogger("tkrylov")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """All experiment settings; defaults follow the color-image experiment."""

    input: Optional[str] = None
    output: Optional[str] = None
    synth: str = "checker"
    n: int = 64
    blur: str = "cross"
    sigma: float = 4.0
    band_r: int = 6
    alpha: float = 0.8
    beta: float = 0.1
    gamma: float = 0.1
    nu: float = 1e-3
    seed: int = 0
    solver: str = "gmres"
    m: str = "10"
    iter_max: int = 10
    tol: float = 1e-6
    mu: str = "gcv"
    eta: float = 1.1
    m_max: int = 200
    figures: bool = True

    def validate(self):
        if self.blur not in ("cross", "within"):
            raise ConfigError(f"blur must be 'cross' or 'within', got {self.blur!r}")
        if self.solver not in ("gmres", "ggkb"):
            raise ConfigError(f"solver must be 'gmres' or 'ggkb', got {self.solver!r}")
        if self.synth not in imaging.SYNTH_KINDS:
            raise ConfigError(f"synth must be one of {imaging.SYNTH_KINDS}")
        if self.m != "full" and not (self.m.isdigit() and int(self.m) >= 1):
            raise ConfigError(f"m must be a positive integer or 'full', got {self.m!r}")
        if self.mu != "gcv":
            try:
                if float(self.mu) < 0:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"mu must be 'gcv' or a nonnegative number, got {self.mu!r}")
        if self.sigma <= 0 or self.band_r < 0 or self.nu < 0 or self.eta < 1:
            raise ConfigError("need sigma > 0, band_r >= 0, nu >= 0 and eta >= 1")
        return self


def _coerce(name, raw):
    f = {f.name: f for f in dataclasses.fields(ExperimentConfig)}.get(name)
    if f is None:
        raise ConfigError(f"unknown setting {name!r}")
    kind = f.type if isinstance(f.type, type) else str
    if f.name in ("input", "output"):
        kind = str
    try:
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            if str(raw).lower() in ("1", "true", "yes", "on"):
                return True
            if str(raw).lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}")


def read_config_file(path):
    """Parse UTF-8 ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _coerce(key, value)
    return out


def build_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = _coerce(f.name, v)
    return ExperimentConfig(**values).validate()


# -- key = value reports -----------------------------------------------------


def _fmt(v):
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_kv(path, items):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in items.items():
            fh.write(f"{k} = {_fmt(v)}\n")


def read_kv(path):
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
    return out


# -- model construction --------------------------------------------------------


def make_operator(blur, n1, n2, n3, sigma, band_r, alpha, beta, gamma):
    if n1 != n2:
        raise ConfigError(f"images must be square, got {n1}x{n2}")
    if blur == "cross":
        if n3 != 3:
            raise ConfigError("cross-channel blur needs a single RGB image (3 slices)")
        try:
            return build_cross_channel_blur(BlurModel(n1, sigma, band_r, alpha, beta, gamma))
        except ValueError as exc:
            raise ConfigError(str(exc))
    if n3 % 3:
        raise ConfigError("within-channel blur needs 3 slices per frame")
    return build_within_channel_video_blur(n1, n3 // 3, sigma, band_r)


def _load_source(cfg):
    if cfg.input is None:
        return imaging.synth_image(cfg.synth, cfg.n, cfg.seed), f"synth:{cfg.synth}", False
    path = Path(cfg.input)
    if path.is_dir():
        return imaging.frames_to_tensor(imaging.load_frames(path)), str(path), True
    if not path.exists():
        raise ConfigError(f"input {path} does not exist")
    return imaging.load_ppm(path), str(path), False


def _save_visual(T, path, frames):
    if frames:
        imaging.save_frames(imaging.tensor_to_frames(T), path)
    else:
        imaging.save_ppm(T, path)


def cmd_degrade(cfg):
    """Blur and add noise to the configured image; write tensors and metadata."""
    X_hat, source, frames = _load_source(cfg)
    blur = "within" if frames else cfg.blur
    n1, n2, n3 = X_hat.shape
    op = make_operator(blur, n1, n2, n3, cfg.sigma, cfg.band_r, cfg.alpha, cfg.beta, cfg.gamma)
    C_hat = op.apply(X_hat)
    C, eps = imaging.add_noise(C_hat, cfg.nu, cfg.seed)
    out = Path(cfg.output or "degraded")
    out.mkdir(parents=True, exist_ok=True)
    for name, T in (("X_hat", X_hat), ("C_hat", C_hat), ("N", C - C_hat), ("C", C)):
        save_t3(out / f"{name}.t3", T)
    ext = "" if frames else ".ppm"
    _save_visual(X_hat, out / f"original{ext}", frames)
    _save_visual(C, out / f"degraded{ext}", frames)
    meta = {
        "source": source,
        "blur": blur,
        "frames": int(frames),
        "n1": n1, "n2": n2, "n3": n3,
        "sigma": cfg.sigma, "band_r": cfg.band_r,
        "alpha": cfg.alpha, "beta": cfg.beta, "gamma": cfg.gamma,
        "nu": cfg.nu, "seed": cfg.seed, "eps": eps,
        "degraded_snr": imaging.snr(C, X_hat),
        "degraded_relative_error": imaging.relative_error(C, X_hat),
    }
    write_kv(out / "meta.txt", meta)
    if cfg.figures:
        from .plotting import plot_restoration

        plot_restoration(out / "degrade.png", X_hat, C, None, title=f"{source}, nu={cfg.nu:g}")
    print(f"wrote degraded data to {out} (eps = {eps:.6e})")
    return meta


def run_solver(cfg, op, C, eps):
    if cfg.solver == "gmres":
        m = C.size if cfg.m == "full" else int(cfg.m)
        mu = "gcv" if cfg.mu == "gcv" else float(cfg.mu)
        return gmres_restarted(op, C, cfg=GmresConfig(m=m, iter_max=cfg.iter_max, tol=cfg.tol, mu=mu))
    if not eps > 0:
        raise ConfigError("the ggkb solver needs a positive noise bound (nu > 0)")
    return ggkb_tikhonov(op, C, GgkbConfig(epsilon=eps, eta=cfg.eta, m_max=cfg.m_max))


def cmd_restore(cfg):
    """Restore degraded data written by ``degrade``; emit tensors, report and figure."""
    if cfg.input is None:
        raise ConfigError("restore needs --in pointing at a degrade output directory")
    src = Path(cfg.input)
    if not (src / "meta.txt").exists() or not (src / "C.t3").exists():
        raise ConfigError(f"{src} does not contain degrade output (meta.txt, C.t3)")
    meta = read_kv(src / "meta.txt")
    C = load_t3(src / "C.t3")
    X_hat = load_t3(src / "X_hat.t3") if (src / "X_hat.t3").exists() else None
    op = make_operator(
        meta["blur"], *C.shape, float(meta["sigma"]), int(meta["band_r"]),
        float(meta["alpha"]), float(meta["beta"]), float(meta["gamma"]))
    eps = float(meta["eps"])
    report = run_solver(cfg, op, C, eps)
    out = Path(cfg.output or src)
    out.mkdir(parents=True, exist_ok=True)
    frames = meta.get("frames", "0") == "1"
    save_t3(out / "restored.t3", report.X)
    _save_visual(report.X, out / ("restored" if frames else "restored.ppm"), frames)
    items = {
        "method": report.method,
        "snr": imaging.snr(report.X, X_hat) if X_hat is not None else "nan",
        "relative_error": imaging.relative_error(report.X, X_hat) if X_hat is not None else "nan",
        "degraded_snr": float(meta.get("degraded_snr", "nan")),
        "degraded_relative_error": float(meta.get("degraded_relative_error", "nan")),
        "wall_time": report.wall_time,
        "mu": report.mu_final,
        "m": report.m_used,
        "restarts": report.restarts,
        "residual_norm": report.residual_norm,
        "eps": eps,
        "mu_history": report.mu,
        "residual_history": report.residual_history,
    }
    if report.method == "ggkb":
        items["gauss"] = report.gauss
        items["radau"] = report.radau
    else:
        items["gamma_history"] = report.gamma_check
    write_kv(out / "report.txt", items)
    if cfg.figures:
        from .plotting import plot_restoration

        title = report.method if X_hat is None else f"{report.method}: SNR {items['snr']:.2f} dB"
        plot_restoration(out / "report.png", X_hat, C, report.X, report, title=title)
    print_table([{
        "method": report.method,
        "snr": items["snr"], "relative_error": items["relative_error"],
        "cpu_time": report.wall_time, "mu": report.mu_final, "m": report.m_used,
    }])
    return report, items


def print_table(rows, file=None):
    """Tab-delimited table; the column set is taken from the first row."""
    file = file or sys.stdout
    cols = list(rows[0])
    print("\t".join(cols), file=file)
    for r in rows:
        print("\t".join(f"{r[c]:.4g}" if isinstance(r[c], float) else str(r[c]) for c in cols), file=file)


def cmd_validate(perturb_hessenberg=False):
    from .validation import run_validation

    t0 = time.perf_counter()
    results = run_validation(perturb_hessenberg=perturb_hessenberg)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}\t{r.name}\tobserved={r.observed:.3e}\ttol={r.tol:.0e}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {time.perf_counter() - t0:.1f} s")
    if failed:
        print("failed: " + ", ".join(failed))
    return not failed


# -- bench ---------------------------------------------------------------------

DESK_PRESET = dict(sigma=2.0, band_r=4, nus=(1e-3,), images=("checker", "gradient", "disks"), n=64)
TABLE_PRESET = dict(sigma=4.0, band_r=6, nus=(1e-3, 1e-2))


def _bench_cases(args, cfg):
    """Yield ``(label, X_hat)`` pairs and the blur/noise settings for bench."""
    if cfg.input:
        preset = dict(TABLE_PRESET)
        images = [(Path(p).stem, imaging.load_ppm(p)) for p in cfg.input.split(",")]
    else:
        preset = dict(DESK_PRESET)
        n = args.n if args.n is not None else preset["n"]
        images = [(k, imaging.synth_image(k, n, cfg.seed)) for k in preset["images"]]
    sigma = args.sigma if args.sigma is not None else preset["sigma"]
    band_r = args.band_r if args.band_r is not None else preset["band_r"]
    nus = (args.nu,) if args.nu is not None else preset["nus"]
    return images, float(sigma), int(band_r), nus


def cmd_bench(args, cfg):
    images, sigma, band_r, nus = _bench_cases(args, cfg)
    rows = []
    for label, X_hat in images:
        n1, n2, n3 = X_hat.shape
        op = make_operator("cross", n1, n2, n3, sigma, band_r, cfg.alpha, cfg.beta, cfg.gamma)
        C_hat = op.apply(X_hat)
        for nu in nus:
            C, eps = imaging.add_noise(C_hat, nu, cfg.seed)
            # the larger noise level uses m = 4 and 4 restarts
            m, iters = (cfg.m, cfg.iter_max) if nu < 5e-3 else ("4", 4)
            for solver in ("gmres", "ggkb"):
                run = dataclasses.replace(cfg, solver=solver, m=str(m), iter_max=iters)
                rep = run_solver(run, op, C, eps)
                rows.append({
                    "image": label, "nu": nu, "method": solver,
                    "snr": imaging.snr(rep.X, X_hat),
                    "relative_error": imaging.relative_error(rep.X, X_hat),
                    "cpu_time": rep.wall_time, "mu": rep.mu_final, "m": rep.m_used,
                    "degraded_snr": imaging.snr(C, X_hat),
                    "degraded_relative_error": imaging.relative_error(C, X_hat),
                })
    print_table(rows)
    out = Path(cfg.output or "bench_out")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bench.tsv", "w", encoding="utf-8") as fh:
        print_table(rows, file=fh)
    if cfg.figures:
        from .plotting import plot_bench

        plot_bench(out / "bench.png", rows)
    return rows


# -- argument parsing ----------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--in", dest="input", help="input image (PPM), frame directory or degrade output")
    p.add_argument("--out", dest="output", help="output directory")
    p.add_argument("--synth", choices=imaging.SYNTH_KINDS, help="synthetic image when --in is absent")
    p.add_argument("--n", type=int, help="synthetic image size")
    p.add_argument("--blur", choices=("cross", "within"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--band-r", dest="band_r", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--nu", type=float, help="noise level ||N|| / ||C_hat||")
    p.add_argument("--seed", type=int)
    p.add_argument("--solver", choices=("gmres", "ggkb"))
    p.add_argument("--m", help="inner GMRES iterations, or 'full'")
    p.add_argument("--iter-max", dest="iter_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--mu", help="'gcv' or a fixed regularization parameter (GMRES)")
    p.add_argument("--eta", type=float)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--no-figures", dest="figures", action="store_const", const=False)
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser():
    parser = argparse.ArgumentParser(prog="tkrylov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("degrade", "blur and add noise to an image or frame sequence"),
        ("restore", "restore degraded data with GMRES or Golub-Kahan"),
        ("bench", "run both solvers and tabulate SNR, relative error and time"),
    ):
        _add_common(sub.add_parser(name, help=helptext))
    v = sub.add_parser("validate", help="run the oracle consistency checks")
    v.add_argument("--perturb-hessenberg", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "validate":
            return EXIT_OK if cmd_validate(args.perturb_hessenberg) else EXIT_NUMERIC
        cfg = build_config(args)
        if args.command == "degrade":
            cmd_degrade(cfg)
        elif args.command == "restore":
            cmd_restore(cfg)
        else:
            cmd_bench(args, cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, RuntimeError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
