"""Reconstructing inter-facility patient transfer networks from hospital
admission/discharge records."""

from .classify import (
    OverlapClass,
    OverlapType,
    PairCode,
    Tabulation,
    UnclassifiedDiagnosis,
    classify_group,
    classify_pair,
    diagnosis_group,
    diagnosis_pair,
    pair_code,
    tabulate,
)
from .network import (
    FacilityNetwork,
    TransferEvent,
    build_network,
    export_network,
    infer_direct,
    infer_indirect,
)
from .pipeline import Analysis, analyze
from .records import (
    ConfigError,
    IngestError,
    IngestReport,
    PatientIndex,
    RecordSet,
    SchemaConfig,
    StayRecord,
    filter_region,
    group_by_patient,
    parse_records,
)
from .syngen import GenConfig, GroundTruth, generate
from .temporal import (
    OverlapGroup,
    connected_overlap_groups,
    max_daily_multiplicity,
    overlap_days,
    stay_duration,
)

__version__ = "0.1.0"
