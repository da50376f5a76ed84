#include "mml/calcium.hpp"

#include "mml/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mml {

double CalciumModelParams::max_rate() const
{
    double pump_slope = 0.0;
    if (pump_max_rate > 0.0) {
        const double n = pump_hill;
        const double k = pump_half_saturation;
        if (n == 1.0) {
            pump_slope = pump_max_rate / k;
        } else {
            // d/dC [C^n / (K^n + C^n)] peaks where (C/K)^n = (n-1)/(n+1)
            const double u = (n - 1.0) / (n + 1.0);
            const double c = k * std::pow(u, 1.0 / n);
            const double kn = std::pow(k, n);
            const double cn = std::pow(c, n);
            pump_slope = pump_max_rate * n * kn * std::pow(c, n - 1.0) / ((kn + cn) * (kn + cn));
        }
    }
    return store_uptake + store_release + pump_slope;
}

void CalciumModelParams::validate() const
{
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    if (bad(pump_max_rate) || bad(store_uptake) || bad(store_release))
        throw Error(ErrorKind::config, "calcium rates must be finite and >= 0");
    if (!std::isfinite(pump_half_saturation) || !(pump_half_saturation > 0.0))
        throw Error(ErrorKind::config, "pump half-saturation must be > 0");
    if (!std::isfinite(pump_hill) || pump_hill < 1.0)
        throw Error(ErrorKind::config, "pump Hill exponent must be >= 1");
    if (!std::isfinite(dt) || !(dt > 0.0))
        throw Error(ErrorKind::config, "dt must be > 0");
    if (!std::isfinite(settle_tolerance) || !(settle_tolerance > 0.0))
        throw Error(ErrorKind::config, "settle tolerance must be > 0");
    if (!std::isfinite(max_time) || !(max_time > 0.0))
        throw Error(ErrorKind::config, "max time must be > 0");
    const double rate = max_rate();
    if (rate > 0.0 && dt > 0.1 / rate)
        throw Error(ErrorKind::config, "dt " + format_real(dt) + " exceeds the stability bound " +
                                           format_real(0.1 / rate));
}

CalciumRates transient_rates(const CalciumCellState &cell, double x, const CalciumModelParams &p)
{
    const double c = cell.cytoplasm;
    const double cn = std::pow(c, p.pump_hill);
    const double pump = c > 0.0 ? p.pump_max_rate * cn /
                                      (std::pow(p.pump_half_saturation, p.pump_hill) + cn)
                                : 0.0;
    const double exchange = p.store_uptake * c - p.store_release * cell.store;
    return {cell.activity * cell.weight * x + cell.bias - pump - exchange, exchange};
}

CalciumCellState step_transient(const CalciumCellState &cell, double x, const CalciumModelParams &p)
{
    if (!std::isfinite(x) || x < 0.0)
        throw Error(ErrorKind::input, "extracellular Ca2+ must be finite and >= 0");
    if (!(cell.activity >= 0.0 && cell.activity <= 1.0))
        throw Error(ErrorKind::input, "channel activity must lie in [0, 1]");
    const auto rates = transient_rates(cell, x, p);
    CalciumCellState next = cell;
    next.cytoplasm = std::max(0.0, cell.cytoplasm + p.dt * rates.cytoplasm);
    next.store = std::max(0.0, cell.store + p.dt * rates.store);
    if (!std::isfinite(next.cytoplasm) || !std::isfinite(next.store))
        throw Error(ErrorKind::numeric, "calcium state became non-finite");
    return next;
}

SaturationResult simulate_to_saturation(const CalciumCellState &cell, double x,
                                        const CalciumModelParams &p)
{
    p.validate();
    CalciumCellState state = cell;
    const auto max_steps = static_cast<std::size_t>(std::ceil(p.max_time / p.dt));
    for (std::size_t k = 0; k <= max_steps; ++k) {
        const auto rates = transient_rates(state, x, p);
        if (std::abs(rates.cytoplasm) < p.settle_tolerance &&
            std::abs(rates.store) < p.settle_tolerance)
            return {state.cytoplasm, state.store, static_cast<double>(k) * p.dt, true};
        if (k == max_steps)
            break;
        state = step_transient(state, x, p);
    }
    return {state.cytoplasm, state.store, static_cast<double>(max_steps) * p.dt, false};
}

int bit_of(double concentration, double threshold)
{
    return concentration >= threshold ? 1 : 0;
}

void AdcSystem::validate() const
{
    if (!std::isfinite(threshold) || !(threshold > 0.0))
        throw Error(ErrorKind::config, "bit threshold must be > 0");
    if (!(deactivation >= 0.0 && deactivation <= 1.0))
        throw Error(ErrorKind::config, "deactivation d0 must lie in [0, 1]");
    if (!std::isfinite(input_low) || !std::isfinite(input_high) || !(input_low < input_high) ||
        input_low < 0.0)
        throw Error(ErrorKind::config, "input range must satisfy 0 <= low < high");
    if (!std::isfinite(sample_interval) || !(sample_interval > 0.0))
        throw Error(ErrorKind::config, "sample interval must be > 0");
    for (const auto *c : {&cell1, &cell2})
        if (!(c->weight >= 0.0) || !(c->bias >= 0.0) || !std::isfinite(c->weight) ||
            !std::isfinite(c->bias))
            throw Error(ErrorKind::config, "cell weights and biases must be finite and >= 0");
}

std::vector<double> AdcSystem::interval_midpoints() const
{
    const double width = (input_high - input_low) / 4.0;
    std::vector<double> mids;
    for (int k = 0; k < 4; ++k)
        mids.push_back(input_low + (k + 0.5) * width);
    return mids;
}

int AdcSystem::expected_level(double x) const
{
    const double width = (input_high - input_low) / 4.0;
    const auto level = static_cast<int>(std::floor((x - input_low) / width));
    return std::clamp(level, 0, 3);
}

namespace {

std::map<std::string, double> counts_params(std::map<std::string, double> params,
                                            std::size_t fn, std::size_t fp, std::size_t exc)
{
    params["false_negatives"] = static_cast<double>(fn);
    params["false_positives"] = static_cast<double>(fp);
    params["exceptions"] = static_cast<double>(exc);
    return params;
}

} // namespace

CellTrainingResult train_cell1(const CalciumCellState &cell, const std::vector<LabeledSample> &samples,
                               double threshold, const CalciumTrainingConfig &cfg,
                               const CalciumModelParams &p)
{
    p.validate();
    if (samples.empty())
        throw Error(ErrorKind::input, "no training samples");
    if (!std::isfinite(cfg.weight_step) || !(cfg.weight_step > 0.0))
        throw Error(ErrorKind::config, "weight step must be > 0");

    CellTrainingResult result;
    CalciumCellState work = cell;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::size_t fn = 0, fp = 0;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const auto &s = samples[k];
            const int z = bit_of(simulate_to_saturation(work, s.x, p).cytoplasm, threshold);
            if (z == s.bit)
                continue;
            const double before = work.weight;
            UpdateKind kind;
            if (z == 0) {
                ++fn;
                kind = UpdateKind::false_negative;
                work.weight += cfg.weight_step;
            } else {
                ++fp;
                kind = UpdateKind::false_positive;
                work.weight = std::max(0.0, work.weight - cfg.weight_step);
            }
            result.updates.push_back({epoch, k, s.x, kind, "w0", before, work.weight});
        }
        result.trace.record(counts_params({{"w0", work.weight}}, fn, fp, 0),
                            static_cast<double>(fn + fp));
        if (fn + fp == 0) {
            result.weight = work.weight;
            return result;
        }
    }
    result.weight = work.weight;
    throw TrainingFailure("cell 1 still misclassifies after " + std::to_string(cfg.max_epochs) +
                              " epochs",
                          std::move(result));
}

CellTrainingResult train_cell2(const AdcSystem &system, const std::vector<LabeledSample> &samples,
                               const CalciumTrainingConfig &cfg, const CalciumModelParams &p)
{
    p.validate();
    system.validate();
    if (samples.empty())
        throw Error(ErrorKind::input, "no training samples");
    if (!std::isfinite(cfg.weight_step) || !(cfg.weight_step > 0.0))
        throw Error(ErrorKind::config, "weight step must be > 0");
    if (!std::isfinite(cfg.deactivation_step) || cfg.deactivation_step < 0.0)
        throw Error(ErrorKind::config, "deactivation step must be >= 0");

    // cell1 is fixed during this stage, so its bits are computed once
    std::vector<int> msb;
    for (const auto &s : samples)
        msb.push_back(bit_of(simulate_to_saturation(system.cell1, s.x, p).cytoplasm,
                             system.threshold));

    CellTrainingResult result;
    CalciumCellState work = system.cell2;
    double d0 = system.deactivation;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::size_t fn = 0, fp = 0, exc = 0;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const auto &s = samples[k];
            CalciumCellState cell = work;
            cell.activity = 1.0 - d0 * msb[k];
            const int z = bit_of(simulate_to_saturation(cell, s.x, p).cytoplasm, system.threshold);
            if (z == s.bit)
                continue;
            if (z == 1 && msb[k] == 1) {
                ++exc;
                const double before = d0;
                d0 = std::min(1.0, d0 + cfg.deactivation_step);
                result.updates.push_back({epoch, k, s.x, UpdateKind::exception, "d0", before, d0});
            } else if (z == 0) {
                ++fn;
                const double before = work.weight;
                work.weight += cfg.weight_step;
                result.updates.push_back(
                    {epoch, k, s.x, UpdateKind::false_negative, "w1", before, work.weight});
            } else {
                ++fp;
                const double before = work.weight;
                work.weight = std::max(0.0, work.weight - cfg.weight_step);
                result.updates.push_back(
                    {epoch, k, s.x, UpdateKind::false_positive, "w1", before, work.weight});
            }
        }
        result.trace.record(counts_params({{"w1", work.weight}, {"d0", d0}}, fn, fp, exc),
                            static_cast<double>(fn + fp + exc));
        if (fn + fp + exc == 0) {
            result.weight = work.weight;
            result.deactivation = d0;
            return result;
        }
    }
    result.weight = work.weight;
    result.deactivation = d0;
    throw TrainingFailure("cell 2 still misclassifies after " + std::to_string(cfg.max_epochs) +
                              " epochs",
                          std::move(result));
}

AdcTrainingResult train_adc(const AdcSystem &initial, const CalciumTrainingConfig &cfg,
                            const CalciumModelParams &p)
{
    initial.validate();
    std::vector<LabeledSample> msb_samples, lsb_samples;
    for (double x : initial.interval_midpoints()) {
        const int level = initial.expected_level(x);
        msb_samples.push_back({x, level >> 1});
        lsb_samples.push_back({x, level & 1});
    }
    AdcTrainingResult out;
    out.system = initial;
    out.cell1 = train_cell1(initial.cell1, msb_samples, initial.threshold, cfg, p);
    out.system.cell1.weight = out.cell1.weight;
    out.cell2 = train_cell2(out.system, lsb_samples, cfg, p);
    out.system.cell2.weight = out.cell2.weight;
    out.system.deactivation = out.cell2.deactivation;
    return out;
}

Conversion adc_convert(const AdcSystem &system, double x, const CalciumModelParams &p)
{
    system.validate();
    if (!std::isfinite(x) || x < system.input_low || x > system.input_high)
        throw Error(ErrorKind::range, "input " + format_real(x) + " uM outside [" +
                                          format_real(system.input_low) + ", " +
                                          format_real(system.input_high) + "]");
    Conversion c;
    c.x = x;
    const auto r1 = simulate_to_saturation(system.cell1, x, p);
    c.cell1_cytoplasm = r1.cytoplasm;
    c.msb = bit_of(r1.cytoplasm, system.threshold);
    CalciumCellState cell2 = system.cell2;
    cell2.activity = 1.0 - system.deactivation * c.msb;
    const auto r2 = simulate_to_saturation(cell2, x, p);
    c.cell2_cytoplasm = r2.cytoplasm;
    c.lsb = bit_of(r2.cytoplasm, system.threshold);
    c.settled = r1.settled && r2.settled;
    return c;
}

std::string adc_trace_to_csv(const AdcTrainingResult &result, const AdcSystem &initial)
{
    std::string out = "epoch,w0,w1,d0,errors\n";
    std::size_t epoch = 0;
    for (const auto &e : result.cell1.trace.entries)
        out += std::to_string(epoch++) + "," + format_real(e.params.at("w0")) + "," +
               format_real(initial.cell2.weight) + "," + format_real(initial.deactivation) + "," +
               format_real(e.error) + "\n";
    for (const auto &e : result.cell2.trace.entries)
        out += std::to_string(epoch++) + "," + format_real(result.system.cell1.weight) + "," +
               format_real(e.params.at("w1")) + "," + format_real(e.params.at("d0")) + "," +
               format_real(e.error) + "\n";
    return out;
}

std::string conversions_to_csv(const std::vector<Conversion> &rows)
{
    std::string out = "x_uM,C1_uM,C2_uM,code\n";
    for (const auto &c : rows)
        out += format_real(c.x) + "," + format_real(c.cell1_cytoplasm) + "," +
               format_real(c.cell2_cytoplasm) + "," + c.code() + "\n";
    return out;
}

namespace {

struct ConfigRefs {
    std::map<std::string, double *> reals;
    std::size_t *max_epochs;
};

ConfigRefs config_refs(AdcSystem &s, CalciumModelParams &p, CalciumTrainingConfig &cfg)
{
    return {{
                {"pump_max_rate", &p.pump_max_rate},
                {"pump_half_saturation", &p.pump_half_saturation},
                {"pump_hill", &p.pump_hill},
                {"store_uptake", &p.store_uptake},
                {"store_release", &p.store_release},
                {"dt", &p.dt},
                {"settle_tolerance", &p.settle_tolerance},
                {"max_time", &p.max_time},
                {"b0", &s.cell1.bias},
                {"b1", &s.cell2.bias},
                {"w0", &s.cell1.weight},
                {"w1", &s.cell2.weight},
                {"d0", &s.deactivation},
                {"threshold", &s.threshold},
                {"input_low", &s.input_low},
                {"input_high", &s.input_high},
                {"sample_interval", &s.sample_interval},
                {"weight_step", &cfg.weight_step},
                {"deactivation_step", &cfg.deactivation_step},
            },
            &cfg.max_epochs};
}

} // namespace

std::string adc_config_to_text(const AdcSystem &system, const CalciumModelParams &p,
                               const CalciumTrainingConfig &cfg)
{
    AdcSystem s = system;
    CalciumModelParams pp = p;
    CalciumTrainingConfig c = cfg;
    auto refs = config_refs(s, pp, c);
    std::string out;
    for (const auto &[key, ptr] : refs.reals)
        out += key + "=" + format_real(*ptr) + "\n";
    out += "max_epochs=" + std::to_string(*refs.max_epochs) + "\n";
    return out;
}

void apply_adc_config(const std::vector<std::string> &lines, const std::string &source,
                      AdcSystem &system, CalciumModelParams &p, CalciumTrainingConfig &cfg)
{
    auto refs = config_refs(system, p, cfg);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = trim(lines[ln]);
        if (line.empty() || line.front() == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(source, ln + 1, "expected key=value");
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (key == "max_epochs") {
            if (!parse_size(value, *refs.max_epochs))
                throw ParseError(source, ln + 1, "bad max_epochs");
            continue;
        }
        auto it = refs.reals.find(key);
        if (it == refs.reals.end())
            throw ParseError(source, ln + 1, "unknown key '" + key + "'");
        double v = 0.0;
        if (!parse_real(value, v) || !std::isfinite(v))
            throw ParseError(source, ln + 1, "bad value for " + key);
        *it->second = v;
    }
}

} // namespace mml
