#!/usr/bin/env python3
"""
chevalley-hdx command line.
Builds coset complexes of Chevalley groups, measures their links and emits certificates.
"""

import argparse
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.config import BUDGET_ENV_VAR, RunConfig, config
from core.errors import EXIT_OK, EXIT_USAGE, CertificateFailure, DomainError, HDXError, UsageError, exit_code_for
from core.reporting import ReportingManager, dumps_report, summarize
from utils.logging_setup import get_logger, log_shutdown_info, log_startup_info, setup_logging


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, default=5, help="characteristic")
    parser.add_argument("--m", type=int, default=1, help="extension degree")
    parser.add_argument("--modulus", default=None, help="irreducible modulus, coefficients low degree first")
    parser.add_argument("--tol", type=float, default=None, help="eigenvalue tolerance")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1, help="worker cap")
    parser.add_argument("--heavy", action="store_true", help="allow heavy computations")
    parser.add_argument("--allow-small-p", action="store_true", help="permit p <= 3")
    parser.add_argument("--memory-mb", type=float, default=None, help=f"memory budget (also {BUDGET_ENV_VAR})")
    parser.add_argument("--report", default=None, help="write the JSON report to this path")
    parser.add_argument("--summary", action="store_true", help="print a human summary instead of JSON")
    parser.add_argument("--log-level", default=None)


def _add_family(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--family", required=required, choices=list("ABCDEFG"))
    parser.add_argument("--rank", type=int, required=required)
    parser.add_argument("--variant", default=None, choices=["standard", "alternate"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdx", description="Coset-complex HDX toolkit for Chevalley groups")
    groups = parser.add_subparsers(dest="group", required=True)

    rootsys = groups.add_parser("rootsys").add_subparsers(dest="action", required=True)
    info = rootsys.add_parser("info", help="root system, special set and rank-2 cases")
    _add_family(info)
    _add_common(info)

    field_cmd = groups.add_parser("field").add_subparsers(dest="action", required=True)
    make = field_cmd.add_parser("make", help="construct F_{p^m}")
    _add_common(make)

    link_cmd = groups.add_parser("link").add_subparsers(dest="action", required=True)
    analyze = link_cmd.add_parser("analyze", help="explicit rank-2 link graphs")
    _add_family(analyze)
    _add_common(analyze)
    analyze.add_argument("--pair", default=None, help="indices i,j into the special set")
    analyze.add_argument("--edges-csv", default=None)

    complex_cmd = groups.add_parser("complex").add_subparsers(dest="action", required=True)
    build = complex_cmd.add_parser("build", help="enumerate the group and build CC(G, H)")
    _add_family(build)
    _add_common(build)
    build.add_argument("--adjoint", action="store_true")
    build.add_argument("--radius", type=int, default=None, help="build a local ball instead of the whole complex")
    build.add_argument("--output", default=None, help="save the complex (npz + manifest)")
    verify = complex_cmd.add_parser("verify", help="structural checks on a saved or freshly built complex")
    _add_family(verify, required=False)
    _add_common(verify)
    verify.add_argument("--input", default=None)

    spectra_cmd = groups.add_parser("spectra").add_subparsers(dest="action", required=True)
    slink = spectra_cmd.add_parser("link", help="λ₂ of rank-2 links")
    _add_family(slink, required=False)
    _add_common(slink)
    slink.add_argument("--pair", default=None)
    slink.add_argument("--method", default="both", choices=["exact", "power", "both"])
    slink.add_argument("--charsum", default=None, choices=["case2", "case3"])
    slink.add_argument("--spectrum-csv", default=None)

    g2 = groups.add_parser("g2").add_subparsers(dest="action", required=True)
    explore = g2.add_parser("explore", help="G2 link graphs, walk counts and λ₂")
    _add_common(explore)
    explore.add_argument("--case", required=True, choices=["I", "II"])
    explore.add_argument("--k", type=int, default=2)
    explore.add_argument("--no-printed", action="store_true")

    hdx = groups.add_parser("hdx").add_subparsers(dest="action", required=True)
    certify = hdx.add_parser("certify", help="connectivity, link λ₂ and trickling down")
    _add_family(certify)
    _add_common(certify)
    certify.add_argument("--mode", default="auto", choices=["auto", "complex", "links"])
    certify.add_argument("--target", type=float, default=None, help="requested λ")

    matgroup = groups.add_parser("matgroup").add_subparsers(dest="action", required=True)
    enum = matgroup.add_parser("enumerate", help="enumerate a matrix group")
    _add_common(enum)
    enum.add_argument("--realization", required=True, help="slN or sp4")

    system = groups.add_parser("system").add_subparsers(dest="action", required=True)
    diag = system.add_parser("check", help="environment diagnostics")
    _add_common(diag)
    return parser


def _pairs(special, text: Optional[str]) -> List:
    members = list(special.members)
    if text:
        try:
            i, j = (int(x) for x in text.split(","))
        except ValueError:
            raise UsageError(f"--pair must be two indices 'i,j', got '{text}'")
        if not (0 <= i < len(members) and 0 <= j < len(members)) or i == j:
            raise UsageError(f"--pair indices must be distinct and below {len(members)}")
        return [(members[i], members[j])]
    return [(members[i], members[j]) for i in range(len(members)) for j in range(i + 1, len(members))]


class HDXApplication:
    """Parses, validates and dispatches one command."""

    def __init__(self):
        self.logger = get_logger(__name__)
        self.reporter: Optional[ReportingManager] = None
        self.run_config: Optional[RunConfig] = None

    # setup

    def _configure(self, args: argparse.Namespace) -> RunConfig:
        run = RunConfig(
            family=getattr(args, "family", None),
            rank=getattr(args, "rank", None),
            p=args.p,
            m=args.m,
            realization=getattr(args, "realization", None),
            memory_mb=args.memory_mb,
            tolerance=args.tol if args.tol is not None else float(config.get("spectra.tolerance", 1e-9)),
            output=getattr(args, "output", None),
            report=args.report,
            seed=args.seed if args.seed is not None else int(config.get("spectra.seed", 42)),
            threads=args.threads,
            heavy=args.heavy,
            allow_small_p=args.allow_small_p,
        )
        run.validate(certificate=(args.group == "hdx"))
        if run.memory_mb is not None:
            os.environ[BUDGET_ENV_VAR] = str(run.memory_mb)
        config.override("spectra.seed", run.seed)
        config.override("spectra.tolerance", run.tolerance)
        return run

    def _field(self, args):
        from core.algebra.gf import FieldSpec

        return FieldSpec.from_params(args.p, args.m, args.modulus, allow_small_p=args.allow_small_p)

    def _system(self, args):
        from core.algebra.rootsys import build_root_system

        return build_root_system(args.family, args.rank)

    def _realization_name(self, family: str, rank: int) -> str:
        if family == "A":
            return f"sl{rank + 1}"
        if family in ("B", "C") and rank == 2:
            return "sp4"
        raise DomainError(f"no matrix realization for {family}{rank}; use A_d or B2/C2")

    def _realization(self, args):
        from core.algebra.matgroups import MatrixRealization

        name = getattr(args, "realization", None) or self._realization_name(args.family, args.rank)
        return MatrixRealization(name, self._field(args), args.variant if hasattr(args, "variant") else None)

    def _group_table(self, realization, heavy: bool):
        from core.algebra.matgroups import enumerate_group

        budget = int(config.get("budgets.max_group_order", 20000000))
        order = realization.group_order()
        if order > 1000000 and not heavy:
            raise UsageError(f"|G| = {order}; pass --heavy to enumerate groups above one million elements")
        return enumerate_group(realization, budget=max(budget, order) if heavy else budget)

    # commands

    def cmd_rootsys_info(self, args) -> Dict[str, Any]:
        from core.algebra.rootsys import check_positive_span, chevalley_order, positive_cone, special_set

        system = self._system(args)
        special = special_set(system, args.variant or "standard")
        pairs = {}
        for a, b in _pairs(special, None):
            cone = positive_cone(system, a, b)
            pairs[f"{a}|{b}"] = {"generation_case": cone.generation_case, "link_case": cone.link_case,
                                 "cone": sorted(str(r) for r in cone.members)}
        return {
            "system": system.name,
            "roots": len(system),
            "positive_roots": len(system.positive_roots()),
            "simple_roots": [str(r) for r in system.simples],
            "highest_root": str(system.highest_root()),
            "invariants": system.check_invariants(),
            "special_set": {"variant": special.variant, "members": [str(r) for r in special.members],
                            "heights": list(special.heights),
                            "positive_span": check_positive_span(system, special.members)},
            "pairs": pairs,
            "order": chevalley_order(system.family, system.rank, args.p ** args.m),
        }

    def cmd_field_make(self, args) -> Dict[str, Any]:
        f = self._field(args)
        return {"p": f.p, "m": f.m, "q": f.q, "modulus": f.format_poly(f.modulus),
                "modulus_coefficients": list(f.modulus), "tables": bool(f.tables),
                "power_basis": [f.format(x) for x in f.power_basis(f.m - 1)]}

    def cmd_link_analyze(self, args) -> Dict[str, Any]:
        from core.algebra.rootsys import positive_cone, special_set
        from core.spectra import SparseWalkGraph, link_graph, second_eigenvalue

        system, spec = self._system(args), self._field(args)
        special = special_set(system, args.variant or "standard")
        out = {}
        for a, b in _pairs(special, args.pair):
            cone = positive_cone(system, a, b)
            graph = link_graph(system, cone.short, cone.long, spec)
            walk = SparseWalkGraph.from_link(graph)
            entry = {"case": cone.link_case, "left": graph.n_left, "right": graph.n_right,
                     "edges": graph.num_edges, "degree": graph.regular_degree(),
                     "components": walk.components()}
            if entry["components"] == 1:
                limit = int(config.get("spectra.dense_limit", 4000))
                entry["spectrum"] = second_eigenvalue(walk, method="dense" if walk.n <= limit else "power").as_dict()
            if args.edges_csv:
                base, ext = os.path.splitext(args.edges_csv)
                name = args.edges_csv if args.pair else f"{base}_{cone.link_case}_{len(out)}{ext or '.csv'}"
                entry["edges_csv"] = self.reporter.export_edges_csv(graph, name)
            out[f"{a}|{b}"] = entry
        return {"system": system.name, "p": spec.p, "m": spec.m, "links": out}

    def cmd_complex_build(self, args) -> Dict[str, Any]:
        from core.coset_complex import adjoint_complex, build_complex, local_ball, save_complex

        realization = self._realization(args)
        if args.radius is not None:
            K = local_ball(realization, args.radius)
        else:
            K = build_complex(self._group_table(realization, args.heavy), realization.special)
            if args.adjoint:
                K = adjoint_complex(K)
        report = {"counts": K.counts(), "metadata": K.metadata, "partite": K.is_partite()}
        if args.output:
            path, manifest = save_complex(K, args.output)
            report["saved"] = {"archive": path, "manifest": manifest}
        return report

    def cmd_complex_verify(self, args) -> Dict[str, Any]:
        from core.coset_complex import build_complex, load_complex, verify_complex

        if args.input:
            K = load_complex(args.input)
        elif args.family:
            realization = self._realization(args)
            K = build_complex(self._group_table(realization, args.heavy), realization.special)
        else:
            raise UsageError("complex verify needs --input or --family/--rank")
        report = verify_complex(K)
        if not report["passed"]:
            raise CertificateFailure("complex verification failed", witness=report["connectivity"].get("witness"))
        return report

    def cmd_spectra_link(self, args) -> Dict[str, Any]:
        from core.algebra.rootsys import special_set
        from core.spectra import charsum_case2, charsum_case3, link_lambda2

        if args.charsum:
            spectrum = charsum_case2(args.p) if args.charsum == "case2" else charsum_case3(args.p)
            report = spectrum.as_dict()
            if args.spectrum_csv:
                report["csv"] = self.reporter.export_spectrum_csv(spectrum, args.spectrum_csv)
            return report
        if not args.family:
            raise UsageError("spectra link needs --family/--rank or --charsum")
        system, spec = self._system(args), self._field(args)
        special = special_set(system, args.variant or "standard")
        links = {f"{a}|{b}": link_lambda2(system, a, b, spec, tol=self.run_config.tolerance, method=args.method)
                 for a, b in _pairs(special, args.pair)}
        return {"system": system.name, "p": spec.p, "m": spec.m, "links": links}

    def cmd_g2_explore(self, args) -> Dict[str, Any]:
        from core.g2lab import explore

        spec = self._field(args)
        if spec.m > 1 and not args.heavy:
            self.logger.warning("⚠️ G2 exploration above m=1 can take minutes; pass --heavy to silence this")
        return explore(args.case, spec, k_max=args.k, tol=self.run_config.tolerance,
                       compare_printed=not args.no_printed)

    def cmd_hdx_certify(self, args) -> Dict[str, Any]:
        from core.coset_complex import build_complex
        from core.spectra import hdx_certificate, link_family_certificate

        system = self._system(args)
        spec = self._field(args)
        mode = args.mode
        if system.family == "G" or mode == "links":
            cert = link_family_certificate(system, spec, args.variant or "standard", tol=self.run_config.tolerance,
                                           target=args.target, threads=args.threads)
        else:
            realization = self._realization(args)
            if mode == "auto" and (spec.m > 1 or realization.group_order() > 1000000 and not args.heavy):
                cert = link_family_certificate(system, spec, realization.special.variant,
                                               tol=self.run_config.tolerance, target=args.target,
                                               threads=args.threads)
            else:
                K = build_complex(self._group_table(realization, args.heavy), realization.special)
                cert = hdx_certificate(K, tol=self.run_config.tolerance, target=args.target, threads=args.threads)
                cert["counts"] = K.counts()
        if not cert["passed"]:
            raise CertificateFailure(cert.get("reason", "certificate failed"), witness=cert)
        return cert

    def cmd_matgroup_enumerate(self, args) -> Dict[str, Any]:
        from core.algebra.matgroups import MatrixRealization, compute_center

        realization = MatrixRealization(args.realization, self._field(args))
        table = self._group_table(realization, args.heavy)
        center = compute_center(realization, table)
        return {"realization": realization.name, "q": realization.field.q, "order": len(table),
                "formula_order": realization.group_order(), "center": center.as_dict()}

    def cmd_system_check(self, args) -> Dict[str, Any]:
        from utils.diagnostics import SystemDiagnostics

        return SystemDiagnostics().run_all_checks()

    # dispatch

    def _emit(self, report: Dict[str, Any], args) -> None:
        if args.report:
            self.reporter.write_json(report, args.report)
        if args.summary:
            print("\n".join(summarize(report, title=f"{args.group} {args.action}")))
        else:
            sys.stdout.write(dumps_report(report))

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE

        setup_logging(log_level=args.log_level or config.get("logging.level", "INFO"),
                      log_file=bool(config.get("logging.file_logging", True)),
                      log_dir=config.get("logging.log_dir", "logs"))
        command = f"{args.group} {args.action}"
        log_startup_info(command)
        handlers: Dict[str, Callable[[argparse.Namespace], Dict[str, Any]]] = {
            "rootsys info": self.cmd_rootsys_info,
            "field make": self.cmd_field_make,
            "link analyze": self.cmd_link_analyze,
            "complex build": self.cmd_complex_build,
            "complex verify": self.cmd_complex_verify,
            "spectra link": self.cmd_spectra_link,
            "g2 explore": self.cmd_g2_explore,
            "hdx certify": self.cmd_hdx_certify,
            "matgroup enumerate": self.cmd_matgroup_enumerate,
            "system check": self.cmd_system_check,
        }
        exit_code = EXIT_OK
        try:
            self.run_config = self._configure(args)
            self.reporter = ReportingManager()
            report = handlers[command](args)
            self._emit(report, args)
        except CertificateFailure as e:
            self.logger.error(f"❌ {command}: {e}")
            self._emit({"passed": False, "finding": str(e), "witness": e.witness}, args)
            exit_code = exit_code_for(e)
        except HDXError as e:
            self.logger.error(f"❌ {command}: {e}")
            exit_code = exit_code_for(e)
        except KeyboardInterrupt:
            self.logger.info("🛑 Interrupted")
            exit_code = EXIT_USAGE
        except Exception as e:
            self.logger.error(f"❌ {command} failed: {str(e)}")
            exit_code = exit_code_for(e)
        finally:
            log_shutdown_info(exit_code)
        return exit_code


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the exit code."""
    return HDXApplication().run(argv)


def main():
    """Application entry point."""
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
