from django.dispatch import Signal, receiver
import logging

# sender is the command or function running the stage
stage_started = Signal()
stage_finished = Signal()
trajectory_resampled = Signal()


@receiver(stage_started)
def log_stage_started(sender, stage, **kwargs):
    """Progress line on standard error when a run stage begins."""
    details = ', '.join(f"{key}={value}" for key, value in kwargs.items() if key != 'signal')
    logging.info(f"[{stage}] started {details}".rstrip())


@receiver(stage_finished)
def log_stage_finished(sender, stage, elapsed=None, **kwargs):
    if elapsed is None:
        logging.info(f"[{stage}] finished")
    else:
        logging.info(f"[{stage}] finished in {elapsed:.3f}s")


@receiver(trajectory_resampled)
def log_trajectory_resampled(sender, sent, step, denominator, **kwargs):
    logging.warning(
        f"Trajectory for sent={sent} underflowed at step {step} "
        f"(denominator {denominator:.3e}); resampling"
    )
