"""Command-line driver: ``chroma-sr {sr,eval,noise}``."""
import argparse
import json
import logging
import sys

import numpy as np

from . import imgcore, metrics, noisest, recon
from .config import load_config
from .errors import ChromaSRError, ConfigError, InvalidArgumentError, StageError
from .imgcore import ColorImage, DegradationModel

log = logging.getLogger("chromasr")

EXIT_OK = 0
EXIT_STRICT = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_RUNTIME = 4


def _sigma_triple(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected R,G,B")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("sigmas must be >= 0")
    return vals


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scale", type=int, help="upscaling factor (default 3)")
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="group-solve threads (default: all cores)")
    common.add_argument("--strict", action="store_true", help="exit nonzero on solver warnings")
    common.add_argument("--shave", type=int, help="border pixels excluded from metrics")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="chroma-sr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sr", parents=[common], help="super-resolve a noisy color image")
    p.add_argument("input")
    p.add_argument("output", help="output PNG path")

    p = sub.add_parser("eval", parents=[common], help="synthetic degradation benchmark")
    p.add_argument("gt", help="ground-truth image")
    p.add_argument("--sigma", type=_sigma_triple, default=[15.0, 5.0, 10.0],
                   help="per-channel noise std injected on the HR image, R,G,B")
    p.add_argument("--output", help="optional PNG path for the super-resolved result")

    p = sub.add_parser("noise", parents=[common], help="per-channel noise statistics")
    p.add_argument("input")
    return parser


def _config(args):
    return load_config(args.config, scale_factor=args.scale, seed=args.seed,
                       workers=args.workers, shave=args.shave)


def _write_outputs(image, report, output):
    imgcore.write_png(image, output)
    with open(output + ".report.json", "w") as fh:
        json.dump(report, fh, indent=2)


def cmd_sr(args):
    cfg = _config(args)
    lr = imgcore.read_image(args.input)
    res = recon.run_pipeline(lr, cfg)
    report = {"kind": "sr", **res.report, "input_path": args.input, "output_path": args.output}
    _write_outputs(res.image, report, args.output)
    return report


def synthesize(gt, sigma, cfg):
    """Crop ``gt`` to a multiple of the scale, add seeded channel-wise noise,
    then degrade. Returns (cropped gt, noisy LR)."""
    d = cfg.scale_factor
    h = gt.height - gt.height % d
    w = gt.width - gt.width % d
    gt = ColorImage(gt.planes[:, :h, :w])
    rng = np.random.default_rng(cfg.seed)
    noise = np.asarray(sigma, dtype=np.float64)[:, None, None] * rng.standard_normal(gt.shape)
    lr = imgcore.degrade(ColorImage(gt.planes + noise), DegradationModel(d))
    return gt, lr


def bicubic_baseline(lr, d):
    return ColorImage(np.clip(imgcore.upscale(lr, d).planes, 0.0, 255.0))


def cmd_eval(args):
    cfg = _config(args)
    gt, lr = synthesize(imgcore.read_image(args.gt), args.sigma, cfg)
    res = recon.run_pipeline(lr, cfg)
    base = bicubic_baseline(lr, cfg.scale_factor)
    report = {
        "kind": "eval",
        **res.report,
        "input_path": args.gt,
        "injected_sigma": list(args.sigma),
        "ours": metrics.evaluate(res.image, gt, cfg.shave).as_dict(),
        "baseline": metrics.evaluate(base, gt, cfg.shave).as_dict(),
    }
    if args.output:
        report["output_path"] = args.output
        _write_outputs(res.image, report, args.output)
    return report


def cmd_noise(args):
    img = imgcore.read_image(args.input)
    return noisest.estimate_noise_profile(img).as_dict()


COMMANDS = {"sr": cmd_sr, "eval": cmd_eval, "noise": cmd_noise}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"I/O error: {name or ''} {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (StageError, InvalidArgumentError, ChromaSRError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    if args.strict and report.get("warnings"):
        print("strict mode: warnings " + ", ".join(report["warnings"]), file=sys.stderr)
        return EXIT_STRICT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
