#ifndef MML_CALCIUM_HPP
#define MML_CALCIUM_HPP

// Ca2+ signalling perceptron and the two-cell, two-bit ADC built from it.
//
// Each cell follows a reduced transient model:
//
//   dC/dt = a*w*x + b - Vp*C^n/(Kp^n + C^n) - ks*C + kr*S
//   dS/dt = ks*C - kr*S
//
// C is cytoplasmic Ca2+ (uM), S the store (uM), x the extracellular Ca2+
// (uM), w the influx weight (1/s), a the channel activity fraction and b a
// constant bias influx (uM/s). Integration is explicit Euler with states
// clamped at zero.

#include "mml/ann.hpp"
#include "mml/errors.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mml {

struct CalciumModelParams {
    double pump_max_rate = 10.0;        // Vp, uM/s
    double pump_half_saturation = 1.0;  // Kp, uM
    double pump_hill = 2.0;             // n
    double store_uptake = 0.1;          // ks, 1/s
    double store_release = 0.1;         // kr, 1/s
    double dt = 0.01;                   // s
    double settle_tolerance = 1e-6;     // uM/s
    double max_time = 200.0;            // s

    // Gershgorin bound on the Jacobian: ks + kr + steepest pump slope.
    double max_rate() const;
    // Throws config-error for negative rates, n < 1, non-positive dt or a
    // step above 0.1 / max_rate().
    void validate() const;
};

struct CalciumCellState {
    double cytoplasm = 0.0;  // C, uM
    double store = 0.0;      // S, uM
    double activity = 1.0;   // a in [0, 1]
    double weight = 0.0;     // w, 1/s
    double bias = 0.0;       // b, uM/s
};

struct CalciumRates {
    double cytoplasm;
    double store;
};

CalciumRates transient_rates(const CalciumCellState &cell, double x, const CalciumModelParams &p);

// One explicit step. Throws input-error for x < 0 and numeric-error when the
// state stops being finite.
CalciumCellState step_transient(const CalciumCellState &cell, double x, const CalciumModelParams &p);

struct SaturationResult {
    double cytoplasm = 0.0;
    double store = 0.0;
    double time = 0.0;
    // False when max_time ran out first; the values are then the last state
    // reached (a convergence warning, not an error).
    bool settled = false;
};

// Steps from the given state until both |dC/dt| and |dS/dt| fall below the
// settle tolerance.
SaturationResult simulate_to_saturation(const CalciumCellState &cell, double x,
                                        const CalciumModelParams &p);

// 1 iff concentration >= threshold.
int bit_of(double concentration, double threshold);

struct AdcSystem {
    CalciumCellState cell1{0.0, 0.0, 1.0, 0.0, 0.169255};
    CalciumCellState cell2{0.0, 0.0, 1.0, 0.0, 0.287264};
    double deactivation = 0.0;  // d0: fraction of cell2's channel shut when Z0 = 1
    double threshold = 1.0;     // uM
    double input_low = 500.0;   // uM
    double input_high = 2500.0; // uM
    double sample_interval = 500.0;

    void validate() const;
    // Midpoints of the four equal quantization intervals.
    std::vector<double> interval_midpoints() const;
    // Expected two-bit code index (0..3) for x.
    int expected_level(double x) const;
};

struct LabeledSample {
    double x = 0.0;
    int bit = 0;
};

struct CalciumTrainingConfig {
    double weight_step = 0.001;       // dw
    double deactivation_step = 0.05;  // dd
    std::size_t max_epochs = 1000;
};

enum class UpdateKind { false_negative, false_positive, exception };

struct UpdateEvent {
    std::size_t epoch = 0;
    std::size_t sample = 0;
    double x = 0.0;
    UpdateKind kind = UpdateKind::false_negative;
    std::string parameter;
    double before = 0.0;
    double after = 0.0;
};

struct CellTrainingResult {
    double weight = 0.0;
    double deactivation = 0.0;
    // One entry per pass over the samples; error is the number of
    // misclassified samples in that pass, params hold the values after it
    // together with the per-kind update counts.
    TrainingTrace trace;
    std::vector<UpdateEvent> updates;
};

class TrainingFailure : public Error
{
public:
    TrainingFailure(const std::string &what, CellTrainingResult partial)
        : Error(ErrorKind::training_failure, what), partial_(std::move(partial))
    {
    }
    const CellTrainingResult &partial() const noexcept { return partial_; }

private:
    CellTrainingResult partial_;
};

// Sequential perceptron training of the MSB cell: a false negative raises
// the influx weight by dw, a false positive lowers it (never below 0).
// Stops after the first pass without errors.
CellTrainingResult train_cell1(const CalciumCellState &cell, const std::vector<LabeledSample> &samples,
                               double threshold, const CalciumTrainingConfig &cfg,
                               const CalciumModelParams &p);

// Trains the LSB cell with cell1 fixed. Cell2's channel activity is
// 1 - d0 * Z0. A Z0 = Z1 = 1 sample that should read Z1 = 0 raises d0 by dd
// (capped at 1); every other misclassification moves w1 as in train_cell1.
CellTrainingResult train_cell2(const AdcSystem &system, const std::vector<LabeledSample> &samples,
                               const CalciumTrainingConfig &cfg, const CalciumModelParams &p);

struct AdcTrainingResult {
    AdcSystem system;
    CellTrainingResult cell1;
    CellTrainingResult cell2;
};

// Trains cell1 on the MSB and then cell2 on the LSB of the interval
// midpoints.
AdcTrainingResult train_adc(const AdcSystem &initial, const CalciumTrainingConfig &cfg,
                            const CalciumModelParams &p);

struct Conversion {
    double x = 0.0;
    double cell1_cytoplasm = 0.0;
    double cell2_cytoplasm = 0.0;
    int msb = 0;
    int lsb = 0;
    bool settled = true;
    std::string code() const { return std::string(1, char('0' + msb)) + char('0' + lsb); }
};

// Throws range-error outside [input_low, input_high].
Conversion adc_convert(const AdcSystem &system, double x, const CalciumModelParams &p);

// `epoch,w0,w1,d0,errors`: cell1 passes first, then cell2 passes, numbered
// continuously.
std::string adc_trace_to_csv(const AdcTrainingResult &result, const AdcSystem &initial);
std::string conversions_to_csv(const std::vector<Conversion> &rows);

// key=value text for the model parameters and the ADC constants.
std::string adc_config_to_text(const AdcSystem &system, const CalciumModelParams &p,
                               const CalciumTrainingConfig &cfg);
void apply_adc_config(const std::vector<std::string> &lines, const std::string &source,
                      AdcSystem &system, CalciumModelParams &p, CalciumTrainingConfig &cfg);

} // namespace mml

#endif
