"""
报告与记录文件
JSON、CSV 和可读文本都由同一个扁平化字典生成，逐字段一致
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from app.cli.config import OutputFormat, RunConfig
from app.summation.models.experiment import ExperimentReport
from app.summation.models.protocol import GroupRecord, RunOutcome

logger = logging.getLogger(__name__)

TRANSCRIPT_FIELDS = {
    "index", "alice_op", "bob_op", "alice_result", "bob_result", "role", "tp_announcement", "check_result",
}


def single_run_report(
    config: RunConfig,
    outcome: RunOutcome,
    x: str,
    y: str,
    transcript_path: Optional[Path],
    analytic_prediction: Optional[float] = None,
) -> Dict[str, Any]:
    """单次运行的报告"""
    verdict = outcome.verdict
    detected = not verdict.success and verdict.reason.is_detection
    return {
        "config": config.echo(),
        "verdict": str(verdict),
        "result_bits": verdict.result,
        "detection_rate": 1.0 if detected else 0.0,
        "ci95": None,
        "analytic_prediction": analytic_prediction,
        "abort_breakdown": {} if verdict.success else {verdict.reason.value: 1},
        "transcript_path": str(transcript_path) if transcript_path else None,
        "x": x,
        "y": y,
        "abort_step": verdict.step,
        "correct": verdict.result == _xor(x, y) if verdict.success else None,
        "resources": outcome.resources.model_dump(),
        "keys": outcome.keys.model_dump() if outcome.keys else None,
    }


def _xor(x: str, y: str) -> str:
    return "".join("1" if a != b else "0" for a, b in zip(x, y))


def experiment_report(config: RunConfig, report: ExperimentReport) -> Dict[str, Any]:
    """多次运行的实验报告"""
    return {
        "config": config.echo(),
        "verdict": "experiment",
        "result_bits": None,
        "detection_rate": report.detection_rate,
        "ci95": list(report.ci95),
        "analytic_prediction": report.analytic_prediction,
        "abort_breakdown": report.abort_breakdown,
        "transcript_path": None,
        "trials": report.trials,
        "successes": report.successes,
        "ci95_half_width": report.ci95_half_width,
        "correctness_failures": report.correctness_failures,
        "key_leakage": report.key_leakage,
        "check_error_rates": report.check_error_rates,
        "eve_inference_accuracy": report.eve_inference_accuracy,
        "insufficient_sift_rate": report.insufficient_sift_rate,
        "mean_both_sift_groups": report.mean_both_sift_groups,
        "expected_both_sift_groups": report.expected_both_sift_groups,
        "wall_time": report.wall_time,
    }


def flatten(data: Dict[str, Any], prefix: str = "") -> List[Tuple[str, Any]]:
    """嵌套字典展开为 (点分键, 标量) 列表，列表按下标展开"""
    items: List[Tuple[str, Any]] = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(flatten(value, f"{name}.") if value else [(name, None)])
        elif isinstance(value, (list, tuple)):
            items.extend(flatten({str(i): v for i, v in enumerate(value)}, f"{name}.") if value else [(name, None)])
        else:
            items.append((name, value))
    return items


def _scalar(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_report(report: Dict[str, Any], fmt: OutputFormat) -> str:
    if fmt == OutputFormat.JSON:
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    pairs = flatten(report)
    if fmt == OutputFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([key for key, _ in pairs])
        writer.writerow([_scalar(value) for _, value in pairs])
        return buffer.getvalue()
    width = max(len(key) for key, _ in pairs)
    return "".join(f"{key:<{width}}  {_scalar(value)}\n" for key, value in pairs)


def write_report(report: Dict[str, Any], fmt: OutputFormat, path: Optional[Path]) -> str:
    """写入文件（path 为 None 时只返回文本）"""
    text = render_report(report, fmt)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Report written to {path}")
    return text


def transcript_lines(groups: Iterable[GroupRecord]) -> List[str]:
    return [group.model_dump_json(include=TRANSCRIPT_FIELDS) for group in groups]


def write_transcript(outcome: RunOutcome, path: Path) -> Path:
    """每行一个 GroupRecord 的 JSON Lines 记录"""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in transcript_lines(outcome.transcript)), encoding="utf-8")
    logger.info(f"Transcript written to {path} ({len(outcome.transcript)} groups)")
    return path
