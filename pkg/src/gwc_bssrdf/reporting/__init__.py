from .html_report import HTMLReportGenerator
from .junit import JUnitXMLWriter
from .targets import PUBLISHED_MEAN_ERRORS, TargetChecker

__all__ = [
    "HTMLReportGenerator",
    "JUnitXMLWriter",
    "PUBLISHED_MEAN_ERRORS",
    "TargetChecker",
]
