"""Command-line interface.

Subcommands: params, keygen, register, freeze, prove, verify, attack,
extract.  prove/verify speak the length-prefixed wire format over TCP or
run both ends in-process; attack and extract drive the bundled scenarios.
State (registry, keys) lives in small JSON files; --log writes the
machine-readable JSON-lines event log.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

from ..algebra import (
    GroupElement,
    Scalar,
    SchnorrGroup,
    TransparentGroup,
    gen_schnorr_params,
    transparent_backend,
)
from ..protocol import (
    MSG_RESULT,
    ProtocolConfig,
    ProverSession,
    PublicFile,
    VerifierSecret,
    VerifierSession,
    parse_frame,
)
from ..signatures import BBSigKey, BBVerKey, bb_keygen
from .attack import HonestPartiesConfig, estimate_success, run_attack
from .core import LogEntry, derive_rng, log_entry
from .extractor import extractor_E
from .scenarios import SCENARIOS, bank_for


def build_config(backend: str, bits: int, mode: str, ots_bits: int, seed: int) -> ProtocolConfig:
    params = gen_schnorr_params(bits, seed=seed)
    if backend == "schnorr":
        commit_group = SchnorrGroup(params)
    elif backend == "transparent":
        commit_group = TransparentGroup(params.q, "G")
    else:
        raise SystemExit(f"unknown backend {backend!r}")
    return ProtocolConfig(commit_group, transparent_backend(params.q), mode=mode, ots_bits=ots_bits)


# -- JSON (de)serialization ---------------------------------------------------


def _vk_to_json(vk: BBVerKey) -> dict:
    return {
        "g1": vk.g1.value,
        "g2": vk.g2.value,
        "u": vk.u.value,
        "v": vk.v.value,
        "z": vk.z.value,
    }


def _vk_from_json(d: dict) -> BBVerKey:
    return BBVerKey(
        GroupElement(d["g1"], "G1"),
        GroupElement(d["g2"], "G2"),
        GroupElement(d["u"], "G2"),
        GroupElement(d["v"], "G2"),
        GroupElement(d["z"], "GT"),
    )


def load_registry(path: str, config: ProtocolConfig) -> PublicFile:
    with open(path) as fh:
        data = json.load(fh)
    file = PublicFile()
    for rec in data["records"]:
        file.register(_vk_from_json(rec["vk0"]), _vk_from_json(rec["vk1"]), rec["owner"])
    if data.get("frozen"):
        file.freeze()
    return file


def save_registry(path: str, file: PublicFile) -> None:
    data = {
        "frozen": file.frozen,
        "records": [
            {
                "index": r.index,
                "owner": r.owner,
                "vk0": _vk_to_json(r.vk0),
                "vk1": _vk_to_json(r.vk1),
            }
            for r in file.records
        ],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def write_log(path: str, entries: list[LogEntry]) -> None:
    with open(path, "w") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_json_dict()) + "\n")


# -- sockets ------------------------------------------------------------------


def read_frame(sock: socket.socket) -> bytes:
    header = _read_exact(sock, 4)
    length = int.from_bytes(header, "big")
    return header + _read_exact(sock, length)


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed the connection")
        buf += chunk
    return buf


# -- subcommands --------------------------------------------------------------


def cmd_params(args) -> int:
    params = gen_schnorr_params(args.bits, seed=args.seed)
    out = {"p": params.p, "q": params.q, "g": params.g}
    print(json.dumps(out))
    return 0


def cmd_keygen(args) -> int:
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    rng = derive_rng(args.seed, "cli-keygen")
    vk0, sk0 = bb_keygen(config.pairing, rng)
    vk1, sk1 = bb_keygen(config.pairing, rng)
    b = rng.randrange(2)
    data = {
        "vk0": _vk_to_json(vk0),
        "vk1": _vk_to_json(vk1),
        "retained": b,
        "sk0": {"x": sk0.x.value, "y": sk0.y.value},
        "sk1": {"x": sk1.x.value, "y": sk1.y.value},
    }
    with open(args.out, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    print(json.dumps({"written": args.out, "retained": b}))
    return 0


def cmd_register(args) -> int:
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    try:
        file = load_registry(args.registry, config)
    except FileNotFoundError:
        file = PublicFile()
    if file.frozen:
        print("registry is frozen; registration refused", file=sys.stderr)
        return 1
    with open(args.key) as fh:
        key = json.load(fh)
    index = file.register(_vk_from_json(key["vk0"]), _vk_from_json(key["vk1"]), args.owner)
    save_registry(args.registry, file)
    print(json.dumps({"index": index}))
    return 0


def cmd_freeze(args) -> int:
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    file = load_registry(args.registry, config)
    file.freeze()
    save_registry(args.registry, file)
    print(json.dumps({"frozen": True, "records": len(file)}))
    return 0


def _load_secret(path: str, q: int) -> tuple[VerifierSecret, dict]:
    with open(path) as fh:
        key = json.load(fh)
    b = key["retained"]
    sk = key["sk0"] if b == 0 else key["sk1"]
    return key, {"retained": b, "sk": BBSigKey(Scalar(sk["x"], q), Scalar(sk["y"], q))}


def _session_log(frames: list[tuple[str, bytes]]) -> list[LogEntry]:
    return [log_entry(i, "S1", d, f) for i, (d, f) in enumerate(frames)]


def cmd_verify(args) -> int:
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    file = load_registry(args.registry, config)
    record = file.get(args.index)
    key, sec = _load_secret(args.secret, config.q)
    secret = VerifierSecret(args.index, sec["retained"], sec["sk"])
    verifier = VerifierSession(config, record, secret, derive_rng(args.seed, "cli-verifier"))
    frames: list[tuple[str, bytes]] = []
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    server.bind((args.host, args.port))
    server.listen(1)
    actual_port = server.getsockname()[1]
    print(json.dumps({"listening": actual_port}), flush=True)
    conn, _ = server.accept()
    try:
        while verifier.phase != "done":
            frame = read_frame(conn)
            frames.append(("P->V", frame))
            reply = verifier.on_message(frame)
            if reply is not None:
                frames.append(("V->P", reply))
                conn.sendall(reply)
    finally:
        conn.close()
        server.close()
    if args.log:
        write_log(args.log, _session_log(frames))
    print(json.dumps({"outcome": "ACCEPT" if verifier.outcome else "REJECT"}))
    return 0 if verifier.outcome else 1


def cmd_prove(args) -> int:
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    file = load_registry(args.registry, config)
    q = config.q
    witness = Scalar(args.witness % q, q)
    g = config.commit_group
    statement = (
        g.decode(bytes.fromhex(args.statement))
        if args.statement
        else g.exp(g.generator(), witness)
    )
    prover = ProverSession(
        config, statement, witness, args.index, file, derive_rng(args.seed, "cli-prover")
    )
    frames: list[tuple[str, bytes]] = []

    if args.in_process:
        if not args.verifier_secret:
            print("--in-process needs --verifier-secret", file=sys.stderr)
            return 2
        key, sec = _load_secret(args.verifier_secret, q)
        secret = VerifierSecret(args.index, sec["retained"], sec["sk"])
        verifier = VerifierSession(
            config, file.get(args.index), secret, derive_rng(args.seed, "cli-verifier")
        )
        msg = prover.start()
        result = None
        while msg is not None:
            frames.append(("P->V", msg))
            reply = verifier.on_message(msg)
            if reply is None:
                break
            frames.append(("V->P", reply))
            if parse_frame(reply)[0] == MSG_RESULT:
                result = reply
                break
            msg = prover.on_message(reply)
        accepted = bool(verifier.outcome)
    else:
        host, port = args.connect.rsplit(":", 1)
        sock = socket.create_connection((host, int(port)))
        accepted = False
        try:
            msg = prover.start()
            while msg is not None:
                frames.append(("P->V", msg))
                sock.sendall(msg)
                reply = read_frame(sock)
                frames.append(("V->P", reply))
                msg_type, payload = parse_frame(reply)
                if msg_type == MSG_RESULT:
                    accepted = payload == b"\x01"
                    break
                msg = prover.on_message(reply)
        finally:
            sock.close()
    if args.log:
        write_log(args.log, _session_log(frames))
    print(json.dumps({"outcome": "ACCEPT" if accepted else "REJECT"}))
    return 0 if accepted else 1


def cmd_attack(args) -> int:
    if args.scenario not in SCENARIOS:
        print(f"unknown scenario {args.scenario!r}; choices: {sorted(SCENARIOS)}", file=sys.stderr)
        return 2
    spec = SCENARIOS[args.scenario]
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    bank = bank_for(config, args.seed)
    parties = HonestPartiesConfig(config, bank, apk=spec.apk)
    view = run_attack(spec.build(config, bank), parties, args.seed)
    accepted = sum(1 for ok in view.right_outcomes.values() if ok)
    summary = {
        "scenario": spec.name,
        "description": spec.description,
        "aborted": view.aborted,
        "right_outcomes": view.right_outcomes,
        "accepted_right_sessions": accepted,
        "left_completed": view.left_completed,
    }
    if spec.name == "bpk_substitution":
        apk_view = run_attack(
            spec.build(config, bank), HonestPartiesConfig(config, bank, apk=True), args.seed
        )
        summary["with_authentication"] = {"aborted": apk_view.aborted}
    if view.right_sessions and view.aborted is None:
        est = estimate_success(
            lambda: spec.build(config, bank), parties, spec.target,
            trials=args.trials, base_seed=args.seed,
        )
        summary["estimate_success"] = est
        summary["accepted_counted_sessions"] = int(est * args.trials)
    if args.log:
        write_log(args.log, view.log)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_extract(args) -> int:
    if args.scenario not in SCENARIOS:
        print(f"unknown scenario {args.scenario!r}; choices: {sorted(SCENARIOS)}", file=sys.stderr)
        return 2
    spec = SCENARIOS[args.scenario]
    config = build_config(args.backend, args.bits, args.mode, args.ots_bits, args.seed)
    bank = bank_for(config, args.seed)
    adversary = spec.build(config, bank)
    result = extractor_E(adversary, config, args.seed, target=args.target, r_max=args.r_max)
    out = {
        "target": result.target,
        "classification": result.classification,
        "event": result.event,
        "rewinds": {"key_proof": result.piv_rewinds, "main_proof": result.pip_rewinds},
        "knowledge_error": result.knowledge_error,
        "note": result.note,
    }
    if result.classification == "witness":
        out["witness"] = result.witness.value
        statements = [x for x, _ in bank.pairs]
        out["witness_valid"] = any(
            config.rl_spec.relation(x, result.witness) for x in statements
        )
    out["extracted_keys"] = {
        str(idx): {"branch": branch, "x": sk.x.value, "y": sk.y.value}
        for idx, (branch, sk) in result.extracted_keys.items()
    }
    if args.log:
        write_log(args.log, result.forward_view)
    print(json.dumps(out, indent=2))
    ok = result.classification == "witness" or result.extracted_keys
    return 0 if ok else 1


# -- argument plumbing --------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["pedersen", "elgamal"], default="pedersen")
    p.add_argument("--backend", choices=["transparent", "schnorr"], default="transparent")
    p.add_argument("--bits", type=int, default=4, help="bit length of the group order q")
    p.add_argument("--ots-bits", type=int, default=4, help="one-time signature digest bits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", help="write a JSON-lines event log to this path")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="apkzk",
        description="non-malleable zero-knowledge argument engine and attack harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="generate and print group parameters")
    p.add_argument("--bits", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("keygen", help="generate a verifier key pair of pairs")
    _add_common(p)
    p.add_argument("--out", required=True, help="path for the key file (keeps secrets)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("register", help="append a key record to the registry")
    _add_common(p)
    p.add_argument("--registry", required=True)
    p.add_argument("--key", required=True, help="key file from keygen")
    p.add_argument("--owner", default="honest:V1")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("freeze", help="freeze the registry for the proof stage")
    _add_common(p)
    p.add_argument("--registry", required=True)
    p.set_defaults(func=cmd_freeze)

    p = sub.add_parser("prove", help="run a prover session")
    _add_common(p)
    p.add_argument("--registry", required=True)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--witness", type=int, required=True)
    p.add_argument("--statement", help="hex element; defaults to g^witness")
    p.add_argument("--connect", help="host:port of a listening verifier")
    p.add_argument("--in-process", action="store_true", help="run the verifier locally")
    p.add_argument("--verifier-secret", help="key file for --in-process")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="listen for one prover session")
    _add_common(p)
    p.add_argument("--registry", required=True)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--secret", required=True, help="key file from keygen")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("attack", help="run a bundled attack scenario")
    _add_common(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("extract", help="run the extractor against a scenario")
    _add_common(p)
    p.add_argument("--scenario", default="nesting")
    p.add_argument("--target", type=int, default=1)
    p.add_argument("--r-max", type=int, default=64)
    p.set_defaults(func=cmd_extract)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
