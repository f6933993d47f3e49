from groovebench.baseLearner import BaseLearner


class GrooveCosineLearner(BaseLearner):
    """GROOVE - cosine GroupCLIP 커널"""
    NAME = "groove_cosine"
    KERNEL = 'cosine'
