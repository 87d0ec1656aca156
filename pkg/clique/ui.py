from textwrap import dedent

import pandas as pd

from clique.utils import translate_method


class ReportFormatter:
    @staticmethod
    def format_clique(name: str, result, reference=None) -> str:
        reference_line = f"reference size: {reference}" if reference is not None else "reference size: N/A"
        return dedent(
            f"""
            graph: {name}
            clique size: {result.size} (sampler {result.sampler_index + 1})
            {reference_line}
            nodes: {' '.join(str(v) for v in sorted(result.nodes))}
            decode time: {result.elapsed:.4f}s
            """
        )

    @staticmethod
    def format_eval_summary(report) -> str:
        return dedent(
            f"""
            method: {report.method} ({translate_method(report.method.split('(')[0])})
            graphs: {len(report.rows)}
            approximation score: {report.mean_score:.4f} ± {report.std_score:.4f}
            time per graph: {report.mean_seconds:.4f} s/G (forward + decode)
            mean p variance: {report.mean_p_var:.4f}
            """
        )

    @staticmethod
    def format_train_report(report, param_count: int) -> str:
        last_train = f"{report.train_losses[-1]:.4f}" if report.train_losses else "N/A"
        return dedent(
            f"""
            parameters: {param_count}
            epochs run: {len(report.train_losses)}
            last train loss: {last_train}
            best validation loss: {report.best_val_loss:.4f} (epoch {report.best_epoch})
            skipped steps: {report.skipped_steps}
            diverged: {report.diverged}
            wall-clock: {report.elapsed:.1f}s
            """
        )

    @staticmethod
    def format_benchmark(table: pd.DataFrame) -> str:
        lines = ["method                      score              s/G"]
        for row in table.itertuples(index=False):
            if isinstance(row.error, str) and row.error:
                lines.append(f"{row.method:<27} ERROR: {row.error}")
            else:
                lines.append(
                    f"{row.method:<27} {row.mean_score:.4f} ± {row.std:.4f}   ({row.mean_s_per_graph:.4f})"
                )
        return "\n".join(lines)
