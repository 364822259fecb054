from .report import ExperimentReport, SuiteEntry, SuiteReport, Table, write_report

__all__ = ["ExperimentReport", "SuiteEntry", "SuiteReport", "Table", "write_report"]
