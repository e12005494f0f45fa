"""Design and analysis toolkit for transmit-reflect switchable array antennas."""

from .errors import (
    ConfigError,
    DataError,
    DomainError,
    FrequencyRangeError,
    InsufficientSpanError,
    ModelValidityError,
    TRSMError,
)
from .unitcell import (
    DiodeCircuit,
    LayerStack,
    PhaseTable,
    SurrogateConfig,
    UnitCellGeometry,
    cascade_two_ports,
    diode_impedance,
    grid_shunt_impedance,
    invert_phase,
    load_phase_table,
    load_phase_tables,
    polarization_trace,
    save_phase_tables,
    sheet_response,
    surrogate_tables,
    synthesize_phase_table,
    trsl_two_port,
)
from .feed import (
    FeedModel,
    edge_taper,
    feed_field,
    focal_from_taper,
    gain_from_q,
    hemisphere_directivity,
    q_from_gain,
    spillover_efficiency,
    taper_angle,
)
from .synthesis import (
    ArrayDesign,
    PhaseMap,
    assign_ul,
    build_design,
    compensation_map,
    diode_accounting,
    spatial_phase,
)
from .farfield import (
    AngularGrid,
    FarFieldPattern,
    aperture_efficiency,
    directivity,
    efficiency_budget,
    element_excitations,
    evaluate_mode,
    gain_bandwidth_sweep,
    pattern_metrics,
    radiate,
    realized_gain,
)
from .control import set_mode, state_export, validate_state
from .config import DesignConfig, load_config

__version__ = "0.1.0"
