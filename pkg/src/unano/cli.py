"""Command-line interface.

Exit codes: 0 success, 1 validation failures, 2 parse or usage errors,
3 I/O errors. Settings resolve as flag > ``UNANO_*`` environment variable >
``unano.trig`` config file > built-in default.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from unano import __version__
from unano.claims import (
    ClaimStore,
    agreement_profile,
    assert_relation,
    contradiction_pairs,
    endpoints,
    load_store,
    relations_of,
    save_store,
)
from unano.cnl import auto_formalize, load_grammar
from unano.errors import (
    AlreadyFormalized,
    EndpointKindMismatch,
    NotAStatementUri,
    ParseError,
    SelfContradiction,
    UnanoError,
    UnknownRelationPredicate,
)
from unano.fileio import atomic_write_text
from unano.nanopub import (
    Nanopub,
    ValidationReport,
    Violation,
    build_nanopub,
    formalization_status,
    validate_nanopub,
)
from unano.rdf import DEFAULT_GRAPH, Dataset, Iri
from unano.statements import Statement, encode_statement
from unano.trig import parse_trig, serialize_trig
from unano.vocab import (
    CFG_AUTHORITY,
    CFG_GRAMMAR,
    CFG_LOAD_MODE,
    CFG_MINT_NAMESPACE,
    CFG_STORE,
    DEFAULT_AUTHORITY,
    DEFAULT_MINT_NAMESPACE,
    HAS_ASSERTION,
    UNANO_NS,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3

CONFIG_FILE = "unano.trig"
_SCHEME_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Config:
    authority: str = DEFAULT_AUTHORITY
    mint_namespace: str = DEFAULT_MINT_NAMESPACE
    strict: bool = True
    grammar: str | None = None
    store: str | None = None


def _read_config_file(path: Path) -> dict:
    try:
        dataset = parse_trig(path.read_text(encoding="utf-8"))
    except ParseError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_IO) from None
    keys = {
        CFG_AUTHORITY: "authority",
        CFG_MINT_NAMESPACE: "mint_namespace",
        CFG_LOAD_MODE: "load_mode",
        CFG_GRAMMAR: "grammar",
        CFG_STORE: "store",
    }
    out = {}
    for _, p, o in dataset.triples(DEFAULT_GRAPH):
        if p in keys:
            out[keys[p]] = o.value if isinstance(o, Iri) else str(o)
    return out


def resolve_config(args: argparse.Namespace, environ=None) -> Config:
    environ = os.environ if environ is None else environ
    file_values = {}
    config_path = Path(args.config) if args.config else Path(CONFIG_FILE)
    if args.config or config_path.is_file():
        file_values = _read_config_file(config_path)

    def pick(flag, env, key, default):
        if flag is not None:
            return flag
        if environ.get(env):
            return environ[env]
        return file_values.get(key, default)

    load_mode = pick(args.load_mode, "UNANO_LOAD_MODE", "load_mode", "strict")
    if load_mode not in ("strict", "lenient"):
        raise CliError(f"load mode must be 'strict' or 'lenient', got {load_mode!r}")
    cfg = Config(
        authority=pick(args.authority, "UNANO_AUTHORITY", "authority", DEFAULT_AUTHORITY),
        mint_namespace=pick(args.mint_namespace, "UNANO_MINT_NAMESPACE", "mint_namespace", DEFAULT_MINT_NAMESPACE),
        strict=load_mode == "strict",
        grammar=pick(getattr(args, "grammar", None), "UNANO_GRAMMAR", "grammar", None),
        store=pick(getattr(args, "store", None), "UNANO_STORE", "store", None),
    )
    for name in ("authority", "mint_namespace"):
        try:
            Iri(getattr(cfg, name))
        except ValueError as exc:
            raise CliError(f"{name}: {exc}") from None
    return cfg


# -- helpers -----------------------------------------------------------------


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise CliError(f"{path}: not UTF-8 text ({exc.reason})") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _parse_file(path, base=None) -> Dataset:
    text = _read_text(path)
    try:
        return parse_trig(text, base)
    except ParseError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _discover_pub_id(dataset: Dataset) -> Iri | None:
    subjects = sorted({s.value for s, _, _ in dataset.triples(DEFAULT_GRAPH, predicate=HAS_ASSERTION)})
    if len(subjects) != 1:
        return None
    return Iri(subjects[0])


def _load_nanopub_file(path, cfg: Config, pub_id=None):
    """Returns (dataset, pub_id, report). Raises CliError on parse errors."""
    dataset = _parse_file(path, pub_id)
    pid = Iri(pub_id) if pub_id else _discover_pub_id(dataset)
    if pid is None:
        return dataset, None, ValidationReport(
            (Violation("MissingAssertionLink", "no unique np:hasAssertion subject in the default graph"),)
        )
    return dataset, pid, validate_nanopub(dataset, pid, (cfg.authority,))


def _statement_arg(text: str, lang: str, cfg: Config) -> Iri:
    """IRIs pass through; anything without a scheme is minted as a statement IRI."""
    if _SCHEME_RE.match(text):
        return Iri(text)
    return encode_statement(Statement.from_text(text, lang, cfg.authority))


def _load_store(cfg: Config) -> ClaimStore:
    if not cfg.store:
        raise CliError("no claim store given (use --store or UNANO_STORE)")
    path = Path(cfg.store)
    if not path.exists():
        return ClaimStore(known_authorities=(cfg.authority,))
    text = _read_text(path)
    try:
        parse_trig(text)
    except ParseError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None
    try:
        return load_store(path, strict=cfg.strict, known_authorities=(cfg.authority,))
    except UnknownRelationPredicate as exc:
        raise CliError(str(exc)) from None
    except (SelfContradiction, EndpointKindMismatch, NotAStatementUri) as exc:
        raise CliError(f"{path}: {exc}") from None


def _write(path, text: str):
    try:
        atomic_write_text(path, text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _emit(obj, as_json: bool, line: str):
    if as_json:
        print(json.dumps(obj, sort_keys=True, ensure_ascii=False))
    else:
        print(line)


def _kind_name(text: str, store: ClaimStore) -> str:
    key = re.sub(r"[-_ ]", "", text).lower()
    for name in store.registry:
        if name.lower() == key:
            return name
    raise CliError(f"unknown relation kind {text!r} (known: {', '.join(sorted(store.registry))})")


def _file_name_for(pub_id: Iri) -> str:
    v = pub_id.value.rstrip("/#")
    local = re.split(r"[/#:]", v)[-1] or "nanopub"
    return re.sub(r"[^A-Za-z0-9._-]", "_", local) + ".trig"


# -- commands ----------------------------------------------------------------


def cmd_encode(args, cfg: Config) -> int:
    statement = Statement.from_text(args.sentence, args.lang, cfg.authority)
    print(encode_statement(statement).value)
    return EXIT_OK


def cmd_new(args, cfg: Config) -> int:
    try:
        pub_id = Iri(args.id)
    except ValueError as exc:
        raise CliError(f"--id: {exc}") from None
    statement = Statement.from_text(args.sentence, args.lang, cfg.authority)
    formula = None
    if args.formula:
        formula = [q.triple for q in sorted(_parse_file(args.formula).quads, key=lambda q: q.sort_key())]
    if args.partial and not formula:
        raise CliError("--partial needs a non-empty --formula file")
    np = build_nanopub(pub_id, statement, formula, args.partial)
    out = Path(args.out) if args.out else Path(args.dir) / _file_name_for(pub_id)
    text = serialize_trig(np.dataset)
    report = validate_nanopub(parse_trig(text, pub_id), pub_id, (cfg.authority,))
    if not report.valid:  # pragma: no cover - builder/validator agreement is tested separately
        raise CliError(f"internal error: built nanopub is invalid: {report.codes}", EXIT_INVALID)
    _write(out, text)
    print(out)
    return EXIT_OK


def cmd_validate(args, cfg: Config) -> int:
    worst = EXIT_OK
    for path in args.paths:
        try:
            _, pid, report = _load_nanopub_file(path, cfg, args.id)
        except CliError as exc:
            if exc.code == EXIT_IO:
                raise
            _emit({"file": str(path), "result": "ERROR", "error": str(exc)}, args.json, f"ERROR {exc}")
            worst = EXIT_USAGE
            continue
        if report.valid:
            _emit({"file": str(path), "result": "PASS", "violations": []}, args.json, f"PASS {path}")
        else:
            codes = report.codes
            _emit(
                {
                    "file": str(path),
                    "result": "FAIL",
                    "violations": [{"code": v.code, "message": v.message} for v in report.violations],
                },
                args.json,
                f"FAIL {path} {' '.join(codes)}",
            )
            if worst == EXIT_OK:
                worst = EXIT_INVALID
    return worst


def _valid_nanopub(path, cfg: Config, pub_id=None) -> Nanopub:
    dataset, pid, report = _load_nanopub_file(path, cfg, pub_id)
    if not report.valid:
        raise CliError(f"{path}: invalid nanopub ({' '.join(report.codes)})", EXIT_INVALID)
    return Nanopub.from_dataset(dataset, pid, (cfg.authority,))


def cmd_status(args, cfg: Config) -> int:
    np = _valid_nanopub(args.path, cfg, args.id)
    print(formalization_status(np).value)
    return EXIT_OK


def cmd_link(args, cfg: Config) -> int:
    store = _load_store(cfg)
    kind = _kind_name(args.kind, store)
    subject = _statement_arg(args.subject, args.lang, cfg)
    obj = _statement_arg(args.object, args.lang, cfg)
    store = assert_relation(store, subject, kind, obj)
    try:
        save_store(store, cfg.store)
    except OSError as exc:
        raise CliError(f"cannot write {cfg.store}: {exc.strerror or exc}", EXIT_IO) from None
    print(f"{subject.value} {kind} {obj.value}")
    return EXIT_OK


def cmd_relations(args, cfg: Config) -> int:
    store = _load_store(cfg)
    node = _statement_arg(args.node, args.lang, cfg)
    for kind, neighbor, direction in relations_of(store, node):
        _emit(
            {"kind": kind, "direction": direction.value, "neighbor": neighbor.value},
            args.json,
            f"{kind} {direction.value} {neighbor.value}",
        )
    return EXIT_OK


def cmd_contradictions(args, cfg: Config) -> int:
    store = _load_store(cfg)
    for a, b in contradiction_pairs(store):
        print(f"{a.value} {b.value}")
    return EXIT_OK


def cmd_profile(args, cfg: Config) -> int:
    store = _load_store(cfg)
    agrees, disagrees = agreement_profile(store, Iri(args.agent))
    for iri in agrees:
        print(f"agrees {iri.value}")
    for iri in disagrees:
        print(f"disagrees {iri.value}")
    return EXIT_OK


def _nanopub_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise CliError(f"{d} is not a directory", EXIT_IO)
    return sorted(p for p in d.iterdir() if p.suffix == ".trig" and p.is_file())


def cmd_check(args, cfg: Config) -> int:
    store = _load_store(cfg)
    covered = set()
    for path in _nanopub_files(args.directory):
        try:
            np = _valid_nanopub(path, cfg)
        except CliError:
            continue
        covered.add(np.pub_id)
        covered.add(np.sentence_iri)
    for node in endpoints(store):
        if node not in covered:
            print(f"DANGLING {node.value}")
    return EXIT_OK


def cmd_formalize(args, cfg: Config) -> int:
    path = Path(args.path)
    np = _valid_nanopub(path, cfg, args.id)
    grammar_path = args.grammar or cfg.grammar
    try:
        grammar, lexicon = load_grammar(grammar_path, cfg.mint_namespace)
    except ParseError as exc:
        raise CliError(f"{grammar_path}:{exc.line}:{exc.column}: {exc.message}") from None
    except OSError as exc:
        raise CliError(f"cannot read grammar {grammar_path}: {exc}", EXIT_IO) from None
    try:
        result = auto_formalize(np, grammar, lexicon)
    except AlreadyFormalized as exc:
        raise CliError(f"AlreadyFormalized: {exc}") from None
    if result is np:
        print("NOT-COVERED")
        return EXIT_OK
    extra = {"term": Iri(cfg.mint_namespace), "unano": Iri(UNANO_NS)}
    taken = {ns for ns in result.dataset.prefixes.values()}
    extra = {k: v for k, v in extra.items() if k not in result.dataset.prefixes and v not in taken}
    _write(path, serialize_trig(result.dataset.with_prefixes(extra)))
    print("FORMALIZED")
    return EXIT_OK


def cmd_stats(args, cfg: Config) -> int:
    counts = {"Unformalized": 0, "Partial": 0, "Full": 0, "INVALID": 0}
    for path in _nanopub_files(args.directory):
        try:
            np = _valid_nanopub(path, cfg)
        except CliError as exc:
            if exc.code == EXIT_IO:
                raise
            counts["INVALID"] += 1
            continue
        counts[formalization_status(np).value] += 1
    counts["Total"] = sum(counts.values())
    if args.json:
        print(json.dumps(counts, ensure_ascii=False))
    else:
        for label, n in counts.items():
            print(f"{label} {n}")
    return EXIT_INVALID if counts["INVALID"] else EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unano", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"config file (default: ./{CONFIG_FILE} if present)")
    common.add_argument("--authority", help="statement authority IRI")
    common.add_argument("--mint-namespace", dest="mint_namespace", help="namespace for minted term IRIs")
    common.add_argument("--load-mode", dest="load_mode", choices=["strict", "lenient"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="print the statement IRI of a sentence")
    p.add_argument("--lang", default="en")
    p.add_argument("sentence")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("new", parents=[common], help="write a new nanopub file")
    p.add_argument("--id", required=True, help="nanopub IRI")
    p.add_argument("--lang", default="en")
    p.add_argument("--formula", help="TriG file whose triples form the body")
    p.add_argument("--partial", action="store_true", help="mark the formula as partial")
    p.add_argument("--out", help="output file (default: <dir>/<local name>.trig)")
    p.add_argument("--dir", default=".", help="output directory when --out is absent")
    p.add_argument("sentence")
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("validate", parents=[common], help="check nanopub files")
    p.add_argument("--id", help="nanopub IRI (default: discovered from the file)")
    p.add_argument("--json", action="store_true")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("status", parents=[common], help="print Unformalized, Partial or Full")
    p.add_argument("--id")
    p.add_argument("path")
    p.set_defaults(func=cmd_status)

    def store_parser(name, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.add_argument("--store", help="claim store file")
        sp.add_argument("--lang", default="en", help="language for sentence arguments")
        return sp

    p = store_parser("link", "add a relation to the claim store")
    p.add_argument("subject")
    p.add_argument("kind")
    p.add_argument("object")
    p.set_defaults(func=cmd_link)

    p = store_parser("relations", "list relations of a claim or agent")
    p.add_argument("--json", action="store_true")
    p.add_argument("node")
    p.set_defaults(func=cmd_relations)

    p = store_parser("contradictions", "list contradicting claim pairs")
    p.set_defaults(func=cmd_contradictions)

    p = store_parser("profile", "list the claims an agent agrees and disagrees with")
    p.add_argument("agent")
    p.set_defaults(func=cmd_profile)

    p = store_parser("check", "list store endpoints without a nanopub file")
    p.add_argument("directory")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("formalize", parents=[common], help="formalize a nanopub through the CNL grammar")
    p.add_argument("--grammar", help="grammar file (default: bundled starter grammar)")
    p.add_argument("--id")
    p.add_argument("path")
    p.set_defaults(func=cmd_formalize)

    p = sub.add_parser("stats", parents=[common], help="count nanopubs per formalization status")
    p.add_argument("--json", action="store_true")
    p.add_argument("directory")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except CliError as exc:
        print(f"unano: {exc}", file=sys.stderr)
        return exc.code
    except UnanoError as exc:
        print(f"unano: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"unano: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
