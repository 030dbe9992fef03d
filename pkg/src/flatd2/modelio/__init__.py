"""Model files, reports and the command line."""
from .cli import main, run_cli
from .document import ConstantDecl, ModelDocument, parse_document, parse_model
from .report import SCHEMA, Report, ReportError, build_report, render_text

__all__ = [
    "SCHEMA", "ConstantDecl", "ModelDocument", "Report", "ReportError", "build_report", "main",
    "parse_document", "parse_model", "render_text", "run_cli",
]
