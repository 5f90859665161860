"""
实验与命令行包，提供闭式/数值对照实验、验收套件和报告输出
"""

from .report import (
    CriterionStatus,
    ExperimentReport,
    ReportBuilder,
    ReportBundle,
    csv_text,
    relative_error,
    report_json,
    report_schema,
    write_csv,
    write_report,
)
from .commands import (
    ExperimentResult,
    cmd_classify,
    cmd_critical_density,
    cmd_ids,
    cmd_norm,
    cmd_pf,
    default_radius,
    experiment_slug,
    family_spec,
    radius_schedule,
)
from .suite import (
    SuiteJob,
    acceptance_jobs,
    check_kernel_identities,
    check_oracles,
    check_recursions,
    check_thresholds,
    cmd_report,
    summarize,
)

__all__ = [
    'CriterionStatus',
    'ExperimentReport',
    'ReportBuilder',
    'ReportBundle',
    'csv_text',
    'relative_error',
    'report_json',
    'report_schema',
    'write_csv',
    'write_report',
    'ExperimentResult',
    'cmd_classify',
    'cmd_critical_density',
    'cmd_ids',
    'cmd_norm',
    'cmd_pf',
    'default_radius',
    'experiment_slug',
    'family_spec',
    'radius_schedule',
    'SuiteJob',
    'acceptance_jobs',
    'check_kernel_identities',
    'check_oracles',
    'check_recursions',
    'check_thresholds',
    'cmd_report',
    'summarize',
]
