from groovebench.baseLearner import BaseLearner


class GrooveTdistLearner(BaseLearner):
    """GROOVE - Student-t GroupCLIP 커널 (eta = 자유도)"""
    NAME = "groove_tdist"
    KERNEL = 'tdist'
