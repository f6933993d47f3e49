"""GROOVE ablation - GroupCLIP 제거 / autoencoder만"""
from groovebench.baseLearner import BaseLearner


class GrooveNoGroupClipLearner(BaseLearner):
    NAME = "groove_no_groupclip"
    ABLATION = 'no_groupclip'


class GrooveAutoencoderOnlyLearner(BaseLearner):
    """GroupCLIP, backtranslation 모두 없이 reconstruction만"""
    NAME = "groove_autoencoder_only"
    ABLATION = 'autoencoder_only'
