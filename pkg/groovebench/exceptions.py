"""groovebench 예외 정의"""


class GrooveError(Exception):
    """모든 groovebench 오류의 기본 클래스"""


class ShapeError(GrooveError, ValueError):
    """행렬 차원 불일치"""


class ParameterError(GrooveError, ValueError):
    """분포/모델 파라미터가 유효 범위를 벗어남"""


class DegenerateWeightsError(ParameterError):
    """multinomial 가중치 합이 0"""


class DegenerateBatchError(GrooveError):
    """train 모드 batchnorm에 샘플 1개짜리 배치"""


class ContractError(GrooveError):
    """함수 사전조건 위반"""


class FormatError(GrooveError):
    """GRVM / 라벨 / 설정 파일 형식 오류"""


class MissingPositivesError(GrooveError):
    """앵커 라벨이 반대 모달리티에 없음"""

    def __init__(self, label):
        super().__init__(f"라벨 {label}의 positive 샘플이 반대 모달리티에 없습니다")
        self.label = label


class UndefinedSimilarityError(GrooveError):
    """영벡터에 대한 cosine 유사도"""


class InfeasibleBatchError(GrooveError):
    """라벨당 배치 할당량이 소수 라벨 개수를 초과"""


class DivergenceError(GrooveError):
    """학습 손실이 유한하지 않음"""

    def __init__(self, iteration: int, loss: float):
        super().__init__(f"반복 {iteration}에서 손실 발산: {loss}")
        self.iteration = iteration
        self.loss = loss


class DegenerateClassificationError(GrooveError):
    """라벨이 1개뿐이라 분류기를 학습할 수 없음"""


class InputError(GrooveError, ValueError):
    """NaN 등 잘못된 솔버 입력"""


class DegenerateGeometryError(GrooveError):
    """모든 점이 같아 거리 구조가 없음"""


class DegenerateColumnError(GrooveError):
    """수송 계획의 열 합이 0"""

    def __init__(self, column: int):
        super().__init__(f"수송 계획의 {column}번 열(소스 샘플)의 질량이 0입니다")
        self.column = column


class KnnInfeasibleError(GrooveError):
    """샘플 수가 k 이하"""


class IncompleteTableError(GrooveError):
    """mean rank 테이블에 빈 칸"""


class UnsupportedSettingError(GrooveError):
    """지원하지 않는 시뮬레이션 shared proportion"""


class InfeasibleSplitError(GrooveError):
    """층화 분할 불가능"""

    def __init__(self, label, message: str):
        super().__init__(f"라벨 {label}: {message}")
        self.label = label


class EmptyReportError(GrooveError):
    """완료된 셀 결과가 없음"""
