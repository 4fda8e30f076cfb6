class GeometryError(Exception):
    """
    Base class for every failure raised by the library.

    Attributes:
        code: Stable identifier reported by the CLI and stored in manifests
        category: "infeasible" (exit 2) or "negative" (exit 1)
    """

    code = "E_GEOMETRY"
    category = "infeasible"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.details = details

    def to_dict(self) -> dict:
        return {
            "error": self.__class__.__name__,
            "code": self.code,
            "category": self.category,
            "message": str(self),
            "details": {k: repr(v) for k, v in self.details.items()},
        }


# gf
class NotPrime(GeometryError):
    code = "E_NOT_PRIME"


class ReducibleModulus(GeometryError):
    code = "E_REDUCIBLE_MODULUS"


class NotASubfield(GeometryError):
    code = "E_NOT_A_SUBFIELD"


class DegenerateLeadingCoefficient(GeometryError):
    code = "E_DEGENERATE_LEADING"


class FieldTooLarge(GeometryError):
    code = "E_FIELD_TOO_LARGE"


class FieldMismatch(GeometryError):
    code = "E_FIELD_MISMATCH"


# mpoly
class ArityMismatch(GeometryError):
    code = "E_ARITY"


class DegenerateSpan(GeometryError):
    code = "E_DEGENERATE_SPAN"


class ZeroForm(GeometryError):
    code = "E_ZERO_FORM"


class BothZero(GeometryError):
    code = "E_BOTH_ZERO"


class ZeroPolynomial(GeometryError):
    code = "E_ZERO_POLYNOMIAL"


class SearchSpaceTooLarge(GeometryError):
    code = "E_SEARCH_SPACE"


# projvar / incidence
class PointNotOnHypersurface(GeometryError):
    code = "E_POINT_NOT_ON_X"


class SingularPoint(GeometryError):
    code = "E_SINGULAR_POINT"


class PlaneContainedInX(GeometryError):
    code = "E_PLANE_IN_X"


class InseparableProjection(GeometryError):
    code = "E_INSEPARABLE_PROJECTION"


class SecantNotFound(GeometryError):
    code = "E_SECANT_NOT_FOUND"


class LineNotInX(GeometryError):
    code = "E_LINE_NOT_IN_X"


class LineNotInPlane(GeometryError):
    code = "E_LINE_NOT_IN_PLANE"


class SingularConic(GeometryError):
    code = "E_SINGULAR_CONIC"


class NoRationalPoint(GeometryError):
    code = "E_NO_RATIONAL_POINT"


# chord
class EqualPoints(GeometryError):
    code = "E_EQUAL_POINTS"


class LineContainedInX(GeometryError):
    code = "E_LINE_IN_X"


class DegeneratePencil(GeometryError):
    code = "E_DEGENERATE_PENCIL"


class EvenCharacteristic(GeometryError):
    code = "E_EVEN_CHARACTERISTIC"


class SquareParameter(GeometryError):
    code = "E_SQUARE_PARAMETER"


class NotDefinedOverBase(GeometryError):
    code = "E_NOT_DEFINED_OVER_BASE"


class ExtensionSearchExhausted(GeometryError):
    code = "E_EXTENSION_EXHAUSTED"
    category = "negative"

    def __init__(self, message: str = "", certificate=None, **details):
        super().__init__(message, **details)
        self.certificate = certificate


class TangentSectionDegenerate(GeometryError):
    code = "E_TANGENT_SECTION"


class DominanceCertificateNotFound(GeometryError):
    code = "E_DOMINANCE_NOT_FOUND"
    category = "negative"


# curvespace
class AmbientMismatch(GeometryError):
    code = "E_AMBIENT"


class ImageMeetsSingularLocus(GeometryError):
    code = "E_IMAGE_SINGULAR"


class NotAMember(GeometryError):
    code = "E_NOT_A_MEMBER"


class CommonFactor(GeometryError):
    code = "E_COMMON_FACTOR"


class DegreeTooSmall(GeometryError):
    code = "E_DEGREE_TOO_SMALL"


class DuplicateSupport(GeometryError):
    code = "E_DUPLICATE_SUPPORT"


# gallery
class ParameterOutOfRange(GeometryError):
    code = "E_PARAMETER"


class NotAGenerator(GeometryError):
    code = "E_NOT_A_GENERATOR"


class NotInIdeal(GeometryError):
    code = "E_NOT_IN_IDEAL"


class UnknownClaim(GeometryError):
    code = "E_UNKNOWN_CLAIM"


# cli
class ParseError(GeometryError):
    code = "E_PARSE"

    def __init__(self, message: str = "", line: int = 0, column: int = 0, **details):
        super().__init__(f"{message} (line {line}, column {column})", **details)
        self.line = line
        self.column = column


class ValidationError(GeometryError):
    code = "E_VALIDATION"

    def __init__(self, message: str = "", line: int = 0, column: int = 0, **details):
        super().__init__(f"{message} (line {line}, column {column})", **details)
        self.line = line
        self.column = column


class StoreCorrupt(GeometryError):
    code = "E_STORE_CORRUPT"


class ReplayMismatch(GeometryError):
    code = "E_REPLAY_MISMATCH"
    category = "negative"


EXIT_SUCCESS = 0
EXIT_NEGATIVE = 1
EXIT_INFEASIBLE = 2


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, GeometryError) and error.category == "negative":
        return EXIT_NEGATIVE
    return EXIT_INFEASIBLE
