from groovebench.groove.model import GrooveHyper, GrooveModel, init_model, encode, decode
from groovebench.groove.losses import (
    similarity, groupclip_loss, reconstruction_loss, backtranslation_step,
)
from groovebench.groove.sampler import BalancedBatchPlan, plan_balanced_batches
from groovebench.groove.trainer import TrainConfig, LossRecord, train
from groovebench.groove.ps_baseline import PSConfig, PSBaseline, train_ps_baseline
