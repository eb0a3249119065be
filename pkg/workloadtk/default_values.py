###############################################################################
#                                                                             #
#    This program is free software: you can redistribute it and/or modify     #
#    it under the terms of the GNU General Public License as published by     #
#    the Free Software Foundation, either version 3 of the License, or        #
#    (at your option) any later version.                                      #
#                                                                             #
#    This program is distributed in the hope that it will be useful,          #
#    but WITHOUT ANY WARRANTY; without even the implied warranty of           #
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the            #
#    GNU General Public License for more details.                             #
#                                                                             #
#    You should have received a copy of the GNU General Public License        #
#    along with this program. If not, see <http://www.gnu.org/licenses/>.     #
#                                                                             #
###############################################################################


class DefaultValues():
    """Default values for filenames and common constants."""

    # telemetry
    FEATURES = ('cpu_user_pct',
                'cpu_sys_pct',
                'mem_used_pct',
                'disk_read_mbs',
                'disk_write_mbs',
                'net_rx_mbs',
                'net_tx_mbs',
                'active_containers')
    WINDOW_LENGTH = 10.0
    SAMPLE_INTERVAL = 1.0

    # change detection
    ALPHA = 0.05
    MIN_FEATURES_REJECTING = 1
    CORRECTION = 'bonferroni'

    # discovery
    DBSCAN_EPS = 0.5
    DBSCAN_MIN_PTS = 5
    DBSCAN_NOISE_FLOOR = 4.0
    STD_FLOOR = 1e-9
    DRIFT_EPSILON = 1.0
    ALPHA_MATCH = 0.01
    MATCH_RADIUS = 4.0
    BATCH_LENGTH = 60
    UNKNOWN_LABEL = 0
    STEADY_TRANSITION_LABEL = 0

    # classification
    N_TREES = 50
    MAX_DEPTH = 12
    MIN_LEAF = 2
    TRANSITION_WIDTH = 3
    MAX_STEADY_ROWS = 200

    # zero-shot synthesis
    SYNTHETIC_INSTANCES = 200

    # prediction
    PREDICTOR_ORDER = 3
    SEGMENT_LENGTH = 5
    HORIZONS = (1, 5, 10)

    # optimizer
    GLOBAL_BUDGET = 60
    LOCAL_BUDGET = 20
    SYNC_TOLERANCE_WINDOWS = 2.0

    # knowledge base layout
    KB_DIR = 'kb'
    LANDING_ZONE = 'lz'
    TRANSFORMATION_ZONE = 'tz'
    ANALYTICS_ZONE = 'az'
    ZONES = (LANDING_ZONE, TRANSFORMATION_ZONE, ANALYTICS_ZONE)
    STREAM_EXTENSION = '.jsonl'
    RAW_EXTENSION = '.csv'

    RAW_STREAM = 'raw_samples'
    OBSERVATION_STREAM = 'observation_windows'
    ANALYTIC_STREAM = 'analytic_windows'
    RATE_STREAM = 'rate_windows'
    CONTEXT_STREAM = 'context'
    WINDOW_LABEL_STREAM = 'window_labels'
    TRANSITION_LABEL_STREAM = 'transition_labels'
    DISCOVERY_REPORT_STREAM = 'discovery_reports'
    SEARCH_STREAM = 'searches'
    CLASS_DESCRIPTOR_STREAM = 'class_descriptors'
    WORKLOAD_DB_FILE = 'workload_db.jsonl'

    MODEL_DIR = 'models'
    WORKLOAD_MODEL_FILE = 'workload_classifier.json'
    TRANSITION_MODEL_FILE = 'transition_classifier.json'
    PREDICTOR_MODEL_FILE = 'workload_predictor.json'

    TRAINING_DIR = 'training'
    WORKLOAD_TRAINING_FILE = 'workload_classifier.libsvm'
    PURE_TRAINING_FILE = 'workload_classifier.pure.libsvm'
    TRANSITION_TRAINING_FILE = 'transition_classifier.libsvm'
    PREDICTOR_TRAINING_FILE = 'workload_predictor.libsvm'

    # run outputs
    REPORT_FILE = 'metrics_report.json'
    REPORT_VERSION = 1
    MODEL_VERSION = 1
    SCENARIO_VERSION = 1
    TRACE_DIR = 'trace'
    WINDOW_TRACE_FILE = 'windows.csv'
    JOB_TRACE_FILE = 'jobs.csv'
    SEARCH_TRACE_FILE = 'searches.csv'
    LOG_FILE = 'workloadtk.log'
