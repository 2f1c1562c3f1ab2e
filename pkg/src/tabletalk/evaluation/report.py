"""Task metrics aggregation in the seven-column robot-study schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

COLUMNS = (
    "target_selection",
    "grasping",
    "placing_base_grounding",
    "placing_success",
    "feedback_per_command",
    "pick_and_place",
    "mean_task_length",
)


@dataclass
class TaskMetrics:
    """Counts are stored raw; every ratio is derived, never stored."""

    target_selection: tuple = (0, 0)  # (correct, total)
    grasping: tuple = (0, 0)  # (success, attempts)
    placing_base_grounding: tuple = (0, 0)
    placing_success: tuple = (0, 0)
    feedback: tuple = (0, 0)  # (questions, commands)
    pick_and_place: tuple = (0, 0)
    task_lengths: list = field(default_factory=list)  # actions per task

    @staticmethod
    def _ratio(pair):
        num, den = pair
        return num / den if den else 0.0

    @property
    def feedback_per_command(self) -> float:
        return self._ratio(self.feedback)

    @property
    def mean_task_length(self) -> float:
        return sum(self.task_lengths) / len(self.task_lengths) if self.task_lengths else 0.0

    def ratios(self) -> dict:
        return {
            "target_selection": self._ratio(self.target_selection),
            "grasping": self._ratio(self.grasping),
            "placing_base_grounding": self._ratio(self.placing_base_grounding),
            "placing_success": self._ratio(self.placing_success),
            "feedback_per_command": self.feedback_per_command,
            "pick_and_place": self._ratio(self.pick_and_place),
            "mean_task_length": self.mean_task_length,
        }

    def merged(self, other: "TaskMetrics") -> "TaskMetrics":
        def add(a, b):
            return (a[0] + b[0], a[1] + b[1])

        return TaskMetrics(
            target_selection=add(self.target_selection, other.target_selection),
            grasping=add(self.grasping, other.grasping),
            placing_base_grounding=add(self.placing_base_grounding, other.placing_base_grounding),
            placing_success=add(self.placing_success, other.placing_success),
            feedback=add(self.feedback, other.feedback),
            pick_and_place=add(self.pick_and_place, other.pick_and_place),
            task_lengths=self.task_lengths + other.task_lengths,
        )

    def to_dict(self) -> dict:
        return {
            "target_selection": list(self.target_selection),
            "grasping": list(self.grasping),
            "placing_base_grounding": list(self.placing_base_grounding),
            "placing_success": list(self.placing_success),
            "feedback": list(self.feedback),
            "pick_and_place": list(self.pick_and_place),
            "task_lengths": self.task_lengths,
            "ratios": self.ratios(),
        }


def _fmt_pct(pair) -> str:
    num, den = pair
    pct = 100.0 * num / den if den else 0.0
    return f"{pct:.1f}% ({num}/{den})"


def format_table(metrics: TaskMetrics) -> str:
    """Render the seven columns the way the study table reports them."""
    cells = [
        _fmt_pct(metrics.target_selection),
        _fmt_pct(metrics.grasping),
        _fmt_pct(metrics.placing_base_grounding),
        _fmt_pct(metrics.placing_success),
        f"{metrics.feedback_per_command:.2f} ({metrics.feedback[0]}/{metrics.feedback[1]})",
        _fmt_pct(metrics.pick_and_place),
        f"{metrics.mean_task_length:.1f}",
    ]
    header = ",".join(COLUMNS)
    return header + "\n" + ",".join(cells)


def table2_report(session_logs, out_dir=None):
    """Aggregate session JSON-lines logs into TaskMetrics.

    Accepts an iterable of file paths; malformed lines are skipped and
    counted. Returns (metrics, skipped_lines). When out_dir is given,
    emits report.csv and report.json there.
    """
    metrics = TaskMetrics()
    skipped = 0
    for log_path in session_logs:
        task_actions = 0
        saw_record = False
        with open(log_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    kind = rec["kind"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    skipped += 1
                    continue
                saw_record = True
                payload = rec.get("payload", {})
                if kind == "pick_attempt":
                    task_actions += 1
                    s, a = metrics.grasping
                    metrics.grasping = (s + bool(payload.get("success")), a + 1)
                elif kind == "place":
                    task_actions += 1
                    if "satisfied" in payload:
                        s, t = metrics.placing_success
                        metrics.placing_success = (s + bool(payload["satisfied"]), t + 1)
                elif kind == "question":
                    q, c = metrics.feedback
                    metrics.feedback = (q + 1, c)
                elif kind == "command":
                    q, c = metrics.feedback
                    metrics.feedback = (q, c + 1)
                elif kind == "judgement":
                    stage = payload.get("stage")
                    correct = bool(payload.get("correct"))
                    if stage == "target_selection":
                        c, t = metrics.target_selection
                        metrics.target_selection = (c + correct, t + 1)
                    elif stage == "placing_base_grounding":
                        c, t = metrics.placing_base_grounding
                        metrics.placing_base_grounding = (c + correct, t + 1)
                    elif stage == "pick_and_place":
                        c, t = metrics.pick_and_place
                        metrics.pick_and_place = (c + correct, t + 1)
        if saw_record:
            metrics.task_lengths.append(task_actions)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(format_table(metrics) + "\n")
        (out / "report.json").write_text(
            json.dumps({"metrics": metrics.to_dict(), "skipped_lines": skipped}, indent=2)
        )
    return metrics, skipped
