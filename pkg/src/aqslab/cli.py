"""Command-line entry point: ``aqslab <command> [flags]``.

Exit codes: 0 success, 1 property refuted, 2 bad input, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import aqs, detection, forgery
from .aqs import InvalidKeyError, KeyPair, RotationFamily, SchemeConfig
from .qcore import (
    ANALYTIC_TOL,
    QubitError,
    bloch_state,
    canonical_sign,
    from_pauli_coeffs,
    haar_unitary,
    normalize,
    pauli,
    to_pauli_coeffs,
)

EXIT_OK, EXIT_REFUTED, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _g(x: float) -> str:
    return format(float(x), ".17g")


def parse_coeffs(text: str) -> np.ndarray:
    try:
        w = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse coefficients {text!r}") from None
    if w.shape != (4,) or not np.all(np.isfinite(w)):
        raise UsageError("expected four comma-separated coefficients w0,w1,w2,w3")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > 1e-6:
        raise UsageError(f"coefficients not normalized (|w| = {norm:.9g})")
    return from_pauli_coeffs(canonical_sign(w / norm))


def parse_assistant(text: str, seed: int) -> np.ndarray:
    if text.lower() in aqs.PRESETS:
        return aqs.preset(text)
    if text.lower() == "random":
        return haar_unitary(np.random.default_rng(seed))
    return parse_coeffs(text)


def parse_attack(text: str) -> np.ndarray:
    names = {"s0": 0, "s1": 1, "s2": 2, "s3": 3, "i": 0, "x": 1, "y": 2, "z": 3}
    if text.lower() in names:
        return pauli(names[text.lower()])
    return parse_coeffs(text)


def parse_grid(text: str) -> tuple[int, int]:
    try:
        t, p = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"grid must look like 64x128, got {text!r}") from None
    if t < 16 or p < 32:
        raise UsageError("grid must be at least 16x32")
    return t, p


def parse_key(text: str) -> KeyPair:
    try:
        j, k = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"key must look like j,k, got {text!r}") from None
    return KeyPair(j, k)


def parse_message(args) -> np.ndarray:
    if args.amplitudes:
        try:
            re0, im0, re1, im1 = (float(v) for v in args.amplitudes.split(","))
        except ValueError:
            raise UsageError("amplitudes must be re0,im0,re1,im1") from None
        return normalize([complex(re0, im0), complex(re1, im1)])
    return bloch_state(args.theta, args.phi)


def _scheme(args, assistant) -> SchemeConfig:
    return SchemeConfig(RotationFamily(args.rotations), assistant)


def _complex(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def cmd_check_encryption(args) -> int:
    w = parse_assistant(args.assistant, args.seed)
    rng = np.random.default_rng(args.seed)
    kinds = ["pure", "mixed", "maximally_mixed"]
    worst = 0.0
    for i in range(args.n):
        rho = aqs.random_density(rng, kinds[i % 3])
        worst = max(worst, aqs.encryption_completeness(w, rho))
    ok = worst <= 1e-10
    report = {
        "assistant": list(to_pauli_coeffs(w)),
        "samples": args.n,
        "max_residual": worst,
        "passed": ok,
    }
    _emit(args, json.dumps(report, indent=2))
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_find_forgeable(args) -> int:
    w = parse_assistant(args.assistant, args.seed)
    witness = forgery.construct_witness(w, tol=args.tol)
    scheme = SchemeConfig(RotationFamily.BIASED_Z2, w)
    residuals = forgery.key_residuals(scheme, witness)
    forged_m = witness.replacement @ witness.message
    valid = {}
    for key in scheme.keys():
        forged_s = witness.attack @ aqs.sign(scheme, key, witness.message)
        valid[key.label()] = bool(aqs.verify_exact(scheme, key, forged_m, forged_s, args.tol))
    worst = max(residuals.values())
    ok = worst <= args.tol and all(valid.values())
    doc = {
        "assistant": list(to_pauli_coeffs(w)),
        "abc": list(forgery.abc(w)),
        "witness": forgery.witness_to_dict(witness),
        "verification": {
            "tol": args.tol,
            "residuals": {k.label(): r for k, r in residuals.items()},
            "forged_pair_valid": valid,
            "max_residual": worst,
            "passed": ok,
        },
    }
    _emit(args, json.dumps(doc, indent=2))
    return EXIT_OK if ok else EXIT_REFUTED


def _random_message_certifier(w, l, n, rng, tol) -> bool:
    scheme = SchemeConfig(RotationFamily.UNBIASED_Z4, w)
    return all(
        forgery.check_forgeable(scheme, bloch_state(math.acos(1 - 2 * rng.random()), 2 * math.pi * rng.random()), pauli(l), tol)
        is not None
        for _ in range(n)
    )


def cmd_classify(args) -> int:
    w = parse_assistant(args.assistant, args.seed)
    c = forgery.classify_table1(w)
    doc = {
        "assistant": list(to_pauli_coeffs(w)),
        "forging_paulis": [f"s{l}" for l in c.forging_paulis],
        "satisfied_conditions": [{"pauli": f"s{l}", "pair": pid} for l, pid in c.satisfied_conditions],
        "residuals": {f"s{l},{pid}": list(r) for (l, pid), r in c.residuals.items()},
    }
    code = EXIT_OK
    if args.cross_check:
        rng = np.random.default_rng(args.seed)
        check = {}
        for l in (1, 2, 3):
            brute = _random_message_certifier(w, l, 50, rng, args.tol)
            check[f"s{l}"] = {"table": l in c.forging_paulis, "random_messages_forgeable": brute}
            if brute != (l in c.forging_paulis):
                code = EXIT_REFUTED
        doc["cross_check"] = check
    _emit(args, json.dumps(doc, indent=2))
    return code


def cmd_uniform_forgery(args) -> int:
    w = parse_assistant(args.assistant, args.seed)
    scheme = _scheme(args, w)
    res = forgery.uniform_forgery(scheme, parse_attack(args.attack), args.tol)
    doc = {
        "assistant": list(to_pauli_coeffs(w)),
        "rotations": args.rotations,
        "attack": args.attack,
        "exists": res.exists,
        "max_residual": res.residual,
    }
    if res.exists:
        doc["replacement"] = [[_complex(x) for x in row] for row in res.replacement]
        doc["replacement_coeffs"] = list(to_pauli_coeffs(res.replacement))
    _emit(args, json.dumps(doc, indent=2))
    if args.expect == "exists" and not res.exists:
        return EXIT_REFUTED
    if args.expect == "absent" and res.exists:
        return EXIT_REFUTED
    return EXIT_OK


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("AQSLAB_THREADS", "1")))
    except ValueError:
        raise UsageError("AQSLAB_THREADS must be an integer") from None


def cmd_sweep(args) -> int:
    if args.rotations != "z4":
        raise UsageError("sweep requires --rotations z4")
    w = parse_assistant(args.assistant, args.seed)
    scheme = _scheme(args, w)
    extra = [pauli(l) for l in (1, 2, 3)] if args.include_paulis else []
    records = detection.sweep(
        scheme,
        args.n,
        args.seed,
        grid=parse_grid(args.grid),
        refine_tol=args.refine_tol,
        workers=_workers(),
        extra_attacks=extra,
    )
    bins = detection.envelope(records, args.bins)
    out = Path(args.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.format == "csv":
            detection.write_sweep_csv(records, out / "sweep.csv")
            detection.write_envelope_csv(bins, out / "envelope.csv")
        else:
            (out / "sweep.json").write_text(json.dumps([_record_dict(r) for r in records], indent=1) + "\n")
            (out / "envelope.json").write_text(json.dumps([_bin_dict(b) for b in bins], indent=1) + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    far = [r.p_q for r in records if r.d_q >= 0.1]
    b2 = detection.bin_index(2.0, args.bins)
    print(f"records: {len(records)}")
    if far:
        print(f"min p_q over d_q >= 0.1: {_g(min(far))}")
        print(f"rows with d_q >= 0.1 and p_q < 1e-6: {sum(p < 1e-6 for p in far)}")
    print(f"bin containing d=2: [{_g(bins[b2].d_lo)}, {_g(bins[b2].d_hi)}) p_min={_g(bins[b2].p_min)}")
    return EXIT_OK


def _record_dict(r) -> dict:
    return {
        "index": r.seed_index,
        "q": list(r.attack_coeffs),
        "d_q": r.d_q,
        "p_q": r.p_q,
        "theta_min": r.argmin.theta,
        "phi_min": r.argmin.phi,
    }


def _bin_dict(b) -> dict:
    return {"d_lo": b.d_lo, "d_hi": b.d_hi, "p_min": None if b.support_count == 0 else b.p_min, "count": b.support_count}


def _fmt_state(v) -> str:
    return "(" + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in v) + ")"


def cmd_demo_sign(args) -> int:
    w = parse_assistant(args.assistant, args.seed)
    scheme = _scheme(args, w)
    key = scheme.check_key(parse_key(args.key))
    m = parse_message(args)
    s = aqs.sign(scheme, key, m)
    lines = [
        f"scheme: rotations={args.rotations} assistant={args.assistant} key=({key.j},{key.k})",
        f"message   M = {_fmt_state(m)}",
        f"signature S = {_fmt_state(s)}",
        f"recovered   = {_fmt_state(aqs.recover(scheme, key, s))}",
        f"exact verdict (M, S): {'valid' if aqs.verify_exact(scheme, key, m, s, args.tol) else 'INVALID'}",
    ]
    sent = s
    if args.tamper:
        q = parse_attack(args.tamper)
        sent = q @ s
        lines.append(f"tampered signature Q S = {_fmt_state(sent)}")
        lines.append(f"exact verdict (M, Q S): {'valid' if aqs.verify_exact(scheme, key, m, sent, args.tol) else 'INVALID'}")
        uni = forgery.uniform_forgery(scheme, q, args.tol)
        if uni.exists:
            um = uni.replacement @ m
            verdict = aqs.verify_exact(scheme, key, um, sent, args.tol)
            lines.append(
                "warning: this attack is a uniform forgery for the scheme (Pauli-only encryption weakness); "
                f"forged pair (U M, Q S) verdict: {'valid' if verdict else 'INVALID'}"
            )
    if args.copies:
        rng = np.random.default_rng(args.seed)
        accepted = aqs.verify_sampled(scheme, key, m, sent, args.copies, rng)
        rec = aqs.recover(scheme, key, sent)
        p = 1.0 - aqs.swap_pass_probability(m, rec)
        lines.append(f"sampled verdict ({args.copies} swap tests, seed {args.seed}): {'accept' if accepted else 'reject'}")
        lines.append(f"single-test detection for this key P = {_g(p)}; accept probability (1-P)^n = {_g(detection.escape_probability(p, args.copies))}")
        if args.tamper and scheme.rotations is RotationFamily.UNBIASED_Z4:
            pk = detection.detection_prob(scheme, parse_attack(args.tamper), m)
            lines.append(f"key-averaged detection probability P_(Q,M) = {_g(pk)}")
    _emit(args, "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--assistant", default="t", help="preset (wa, t, identity), 'random', or w0,w1,w2,w3")
    common.add_argument("--rotations", choices=["z2", "z4"], default="z4")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=ANALYTIC_TOL)
    common.add_argument("--out", default=None)

    parser = argparse.ArgumentParser(prog="aqslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-encryption", parents=[common])
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_check_encryption)

    p = sub.add_parser("find-forgeable", parents=[common])
    p.set_defaults(func=cmd_find_forgeable)

    p = sub.add_parser("classify", parents=[common])
    p.add_argument("--cross-check", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("uniform-forgery", parents=[common])
    p.add_argument("--attack", required=True, help="s0..s3 or q0,q1,q2,q3")
    p.add_argument("--expect", choices=["exists", "absent"], default=None)
    p.set_defaults(func=cmd_uniform_forgery)

    p = sub.add_parser("sweep", parents=[common])
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--grid", default="64x128")
    p.add_argument("--refine-tol", type=float, default=detection.DEFAULT_REFINE_TOL)
    p.add_argument("--bins", type=int, default=detection.DEFAULT_BINS)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--include-paulis", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo-sign", parents=[common])
    p.add_argument("--key", default="0,0", help="j,k")
    p.add_argument("--theta", type=float, default=math.pi / 3)
    p.add_argument("--phi", type=float, default=math.pi / 5)
    p.add_argument("--amplitudes", default=None, help="re0,im0,re1,im1")
    p.add_argument("--tamper", default=None, help="attack applied to the signature in transit")
    p.add_argument("--copies", type=int, default=0)
    p.set_defaults(func=cmd_demo_sign)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, QubitError, InvalidKeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
