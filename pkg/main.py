# main.py
from datetime import datetime
import cmath
import logging
import math
import sys
import time

import pandas as pd

from app.constants import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, EXIT_SINGULAR, EXIT_USAGE
from app.exact_formulas import (
    ThreePointInput,
    check_shift_equation,
    dozz,
    fateev_integral,
    fateev_litvinov,
    liouville_reflection,
    reflection_coeff,
    shift_coeff_A,
    shift_coeff_B,
    shift_coefficients,
)
from app.exceptions import (
    ConfigError,
    DomainViolation,
    GammaPole,
    IntegerArgument,
    SingularEvaluation,
    TodaCftError,
    WallDegeneracy,
)
from app.gmc_simulator import GmcSimulator
from app.hypergeometric_blocks import (
    BlockParams,
    CrossingCoefficients,
    block_H,
    closed_form_coefficients,
    crossing_coefficients_from_connection,
    crossing_combination,
    ode_residual,
)
from app.root_system import TodaParams, weyl_element
from app.special_functions import LogSignedReal, l_func, upsilon, upsilon_log
from app.utils.args_parser import parse_arguments
from app.utils.config import TODA_CFT_OUTPUT_DIR, load_run_config
from app.utils.data_utils import JsonLinesWriter, RunManifest, manifest_path, weight_from_value, write_csv, write_json
from app.utils.logger import setup_logging
from app.verification import VerificationRunner, summarize


class UsageError(Exception):
    """Arguments parsed but cannot be turned into inputs."""


def _params(args):
    mu = tuple(args.mu) if args.mu else (1.0, 1.0)
    return TodaParams(args.gamma, mu * 2 if len(mu) == 1 else mu)


def _three_point_input(weights, params):
    try:
        return ThreePointInput(weight_from_value(weights["alpha0"]), float(weights["kappa"]),
                               weight_from_value(weights["alpha_inf"]), params)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"--weights must provide alpha0, kappa and alpha_inf: {e}")


def _liouville_weights(weights):
    try:
        if isinstance(weights, dict):
            return tuple(float(weights[k]) for k in ("a1", "a2", "a3"))
        a1, a2, a3 = (float(w) for w in weights)
        return a1, a2, a3
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"--weights must provide a1, a2 and a3: {e}")


def _chi(label, gamma):
    return gamma if label == "gamma" else 2.0 / gamma


def _evaluate(args):
    """Returns (LogSignedReal or LogComplex-like record, extra fields)."""
    kind = args.kind
    if kind == "upsilon":
        form, value = args.z
        z = value if form == "value" else value * (args.gamma + 2.0 / args.gamma)
        if complex(z).imag == 0.0:
            return upsilon(complex(z).real, args.gamma), {"z": complex(z).real}
        result = upsilon_log(z, args.gamma)
        record = {"value_log_abs": result.log_abs, "phase": result.phase, "value": result.value,
                  "flags": ["zero"] if result.is_zero else []}
        return record, {"z": z}
    if kind == "l":
        return l_func(args.x), {"x": args.x}
    if kind == "dozz":
        a = _liouville_weights(args.weights)
        mu = args.mu[0] if args.mu else 1.0
        return dozz(*a, args.gamma, mu), {"a": a, "mu": mu}
    if kind == "liouville-reflection":
        mu = args.mu[0] if args.mu else 1.0
        return liouville_reflection(args.alpha, args.gamma, mu), {"alpha": args.alpha, "mu": mu}
    if kind == "integral":
        outcome = fateev_integral(args.a, args.b)
        return LogSignedReal.from_float(outcome.closed), {"a": args.a, "b": args.b, "quadrature": outcome.quadrature,
                                                          "residual": outcome.residual}
    params = _params(args)
    if kind == "reflection":
        weights = args.weights
        alpha = weight_from_value(weights.get("alpha", weights) if isinstance(weights, dict) else weights)
        s = weyl_element(args.s)
        return reflection_coeff(s, alpha, params), {"s": s.word, "alpha": alpha.to_json()}
    inp = _three_point_input(args.weights, params)
    if kind == "fali":
        return fateev_litvinov(inp), {"input": inp.to_json()}
    chi = _chi(args.chi, args.gamma)
    coefficients = shift_coefficients(chi, inp)
    A = shift_coeff_A(args.i, chi, inp)
    B = shift_coeff_B(args.i, inp.alpha0, chi, params)
    extra = {"input": inp.to_json(), "i": args.i, "chi": chi, "A_coeff": A, "B_coeff": B,
             "hypergeometric_A": list(coefficients.A), "hypergeometric_B": list(coefficients.B)}
    try:
        extra["residual"] = check_shift_equation(args.i, chi, inp)
    except SingularEvaluation as e:
        extra["residual"] = None
        extra["residual_flags"] = e.flags
    return LogSignedReal.from_float(A / B), extra


def cmd_eval(args):
    """
    Evaluate one quantity and print {value_log_abs, sign or phase, flags}.

    Returns:
        int: 0 on a finite value, 2 on a pole / zero report, 1 on error.
    """
    try:
        result, extra = _evaluate(args)
    except IntegerArgument as e:
        result, extra = {"value_log_abs": -math.inf if e.kind == "zero" else math.inf, "flags": [e.kind]}, {
            "factor": e.factor, "argument": e.value}
    except GammaPole as e:
        result, extra = {"value_log_abs": math.inf, "flags": ["pole"]}, {"factor": e.factor, "argument": e.value}
    except WallDegeneracy as e:
        result, extra = {"value_log_abs": math.nan, "flags": ["indeterminate"]}, {"reason": str(e)}
    if isinstance(result, LogSignedReal):
        result = {"value_log_abs": result.log_abs, "sign": result.sign, "value": result.value, "flags": result.flags}
    payload = {"kind": args.kind, **result, **extra}
    write_json(payload, args.out)
    return EXIT_SINGULAR if payload["flags"] else EXIT_OK


def cmd_verify(args):
    """
    Run a suite and print the per-identity summary.

    Returns:
        int: 0 iff every check passed.
    """
    runner = VerificationRunner(args.gamma, args.trials, args.seed)
    results = runner.run(args.suite)
    summary = summarize(results)
    summary["suite"] = args.suite
    if args.out:
        write_csv(pd.DataFrame([r.to_record() for r in results]), args.out)
        summary["details"] = args.out
    write_json(summary)
    return EXIT_OK if summary["passed"] else EXIT_FAILURE


def cmd_mc(args):
    """
    Run a Monte-Carlo experiment, streaming JSON-lines rows and writing a manifest next to them.

    Returns:
        int: 0 on completion, 65 on an invalid config, 1 on failure or interruption.
    """
    overrides = {"kind": args.kind, "gamma": args.gamma, "mu": args.mu, "weights": args.weights,
                 "seed": args.seed, "n_samples": args.n_samples, "compare": args.compare}
    try:
        config = load_run_config(args.config, overrides)
        simulator = GmcSimulator(config)
    except (ConfigError, DomainViolation, KeyError, ValueError) as e:
        logging.error(f"Invalid run config ---- Error: {str(e)}")
        return EXIT_CONFIG

    out = args.out or TODA_CFT_OUTPUT_DIR / f"mc-{config.kind}-{datetime.now().strftime('%Y-%m-%d-%H-%M-%S')}.jsonl"
    writer = JsonLinesWriter(out)
    parameters = {"kind": config.kind, "gamma": config.gamma, "mu": config.mu, "weights": config.weights,
                  "levels": config.levels, "R": config.R, "points_per_level": config.points_per_level,
                  "n_samples": config.n_samples, "seed": config.seed, "compare": config.compare}
    manifest = RunManifest.create("mc", parameters, config.seed, [out])
    code = EXIT_OK
    try:
        for row in simulator.run():
            writer.append(row)
    except KeyboardInterrupt:
        logging.error(f"MC run interrupted after {writer.rows} rows ---- Error: KeyboardInterrupt")
        manifest.status = "interrupted"
        code = EXIT_FAILURE
    except TodaCftError as e:
        logging.error(f"MC run failed ---- Error: {str(e)}")
        manifest.status = "failed"
        code = EXIT_FAILURE
    finally:
        manifest.write(manifest_path(out))
    return code


def _block_params(args):
    if args.params is not None:
        try:
            return BlockParams(args.params["A"], args.params["B"])
        except (KeyError, TypeError) as e:
            raise UsageError(f'--params must be {{"A": [..3], "B": [..2]}}: {e}')
    params = _params(args)
    return shift_coefficients(_chi(args.chi, args.gamma), _three_point_input(args.weights, params)).block_params()


def cmd_blocks(args):
    """
    Tabulate H_0, H_1, H_2, the crossing-symmetric combination and ODE residuals on a grid as CSV.

    Returns:
        int: 0; per-row failures are reported in the status column.
    """
    p = _block_params(args)
    if args.coeffs == "closed":
        coeffs = closed_form_coefficients(p)
    else:
        lam = crossing_coefficients_from_connection(p)
        coeffs = CrossingCoefficients(1.0, float(lam[0]), float(lam[1]))
    if args.z_grid is not None:
        points = [complex(x, 0.0) for x in args.z_grid]
    else:
        radius, count = args.ring
        points = [radius * cmath.exp(2j * math.pi * k / count) for k in range(count)]

    rows = []
    for z in points:
        row = {"z_re": z.real, "z_im": z.imag}
        try:
            if z.imag == 0.0 and z.real <= 0.0:
                raise DomainViolation(f"z={z} lies on the branch cut of the blocks")
            h = [block_H(i, p, z) for i in range(3)]
            for i, value in enumerate(h):
                row[f"H{i}_re"], row[f"H{i}_im"] = value.real, value.imag
            row["Hcal"] = crossing_combination(p, coeffs, z)
            for i in range(3):
                row[f"residual_H{i}"] = ode_residual(p, lambda w, i=i: block_H(i, p, w), z)
            row["status"] = "ok"
        except TodaCftError as e:
            logging.error(f"Block evaluation failed at z={z} ---- Error: {str(e)}")
            row["status"] = type(e).__name__
        rows.append(row)
    columns = ["z_re", "z_im"] + [f"H{i}_{part}" for i in range(3) for part in ("re", "im")] + \
              ["Hcal"] + [f"residual_H{i}" for i in range(3)] + ["status"]
    df = pd.DataFrame(rows).reindex(columns=columns)
    write_csv(df, args.out)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "mc": cmd_mc, "blocks": cmd_blocks}


def main(argv=None):
    """
    Main entry point for the application.
    """
    setup_logging()
    start = time.time()
    args = parse_arguments(argv)

    logging.info(f"Running command: {args.command}")
    try:
        code = COMMANDS[args.command](args)
    except UsageError as e:
        logging.error(f"Invalid arguments ---- Error: {str(e)}")
        code = EXIT_USAGE
    except TodaCftError as e:
        logging.error(f"Command {args.command} failed ---- Error: {str(e)}")
        code = EXIT_FAILURE

    end = time.time()
    logging.info(f"Command {args.command} complete (exit {code}).\tTime taken: {end - start:.2f} seconds")
    return code


if __name__ == "__main__":
    sys.exit(main())
    """
    Example usage:
        Evaluate Upsilon at q/2:
            python main.py eval upsilon --z 0.5q --gamma 1.0
        Fateev-Litvinov three-point function:
            python main.py eval fali --gamma 1.0 --weights '{"alpha0": [0.2, 0.3], "kappa": 0.5, "alpha_inf": [0.1, 0.4]}'
        Verification suites:
            python main.py verify shift --gamma 1.0 --trials 100
            python main.py verify all --out output/verify.csv
        Monte-Carlo run from a config:
            python main.py mc --config configs/toda.toml --out output/toda.jsonl
        Block table:
            python main.py blocks --params '{"A": [0.1, 0.3, 0.45], "B": [0.35, 0.7]}' --z-grid 0.05:0.85:0.05
    """
