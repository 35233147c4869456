import argparse
from typing import List, Optional

from pydantic import ValidationError

from ybe.config.settings import Settings, get_settings
from ybe.models.run import RunConfig
from ybe.utils.errors import ParseError

COMMANDS = {
    "build": "construct X(A,B,I) from a params file and print the solution table",
    "check": "validate a solution and run the property battery",
    "tower": "print the retraction tower and classification",
    "group": "enumerate the permutation group and compare with the predictions",
    "brace": "build the brace on the permutation group; socle, axioms, ideal",
    "sg": "structure group: words, orbit decompositions, the ideal H",
    "grid": "run the check battery over every block of a grid file",
    "iso": "search for an isomorphism between two inputs",
}


class _Parser(argparse.ArgumentParser):
    """Usage errors become ParseError so they map to the I/O exit code."""

    def error(self, message: str):
        raise ParseError(message, path="<argv>")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ybe",
        description="Build and verify the X(A,B,I) family of Yang-Baxter solutions.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--params", metavar="FILE", help="params (or grid) file")
        source.add_argument(
            "--solution", "--in", dest="solution", metavar="FILE", help="solution file"
        )
        p.add_argument("--output", choices=["text", "structured"], default=None)
        p.add_argument("--seed", type=int, default=None)
        if name in ("group", "brace"):
            p.add_argument("--cap", type=int, default=None, help="enumeration cap")
        if name == "build":
            p.add_argument("--out", metavar="FILE", help="write the solution here")
        if name == "brace":
            p.add_argument("--dump-hnf", action="store_true", help="print the K basis")
            p.add_argument("--exhaustive-limit", type=int, default=None)
        if name == "sg":
            p.add_argument("--probe-center", action="store_true")
            p.add_argument("--radius", type=int, default=None)
            p.add_argument("--word", help='e.g. "x3 x5^-1 x0" (0-based points)')
            p.add_argument("--samples", type=int, default=None)
        if name == "grid":
            p.add_argument("--workers", type=int, default=None)
        if name == "iso":
            p.add_argument("--other", required=True, metavar="FILE")
    return parser


def parse_config(
    argv: Optional[List[str]] = None, settings: Optional[Settings] = None
) -> RunConfig:
    """Parse argv into a RunConfig; flags override settings."""
    settings = settings or get_settings()
    args = build_parser().parse_args(argv)

    def pick(attr: str, default):
        value = getattr(args, attr, None)
        return default if value is None else value

    try:
        return RunConfig(
            command=args.command,
            params_path=args.params,
            solution_path=args.solution,
            other_path=getattr(args, "other", None),
            out_path=getattr(args, "out", None),
            cap=pick("cap", settings.cap),
            radius=pick("radius", settings.radius),
            seed=pick("seed", settings.seed),
            samples=pick("samples", settings.random_words),
            axiom_exhaustive_limit=pick(
                "exhaustive_limit", settings.axiom_exhaustive_limit
            ),
            axiom_sample=settings.axiom_sample,
            output=pick("output", settings.output),
            dump_hnf=getattr(args, "dump_hnf", False),
            probe_center=getattr(args, "probe_center", False),
            word=getattr(args, "word", None),
            workers=pick("workers", settings.workers),
        )
    except ValidationError as exc:
        reason = "; ".join(err["msg"] for err in exc.errors())
        raise ParseError(reason, path="<argv>") from exc
