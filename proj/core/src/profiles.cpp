#include "bemcal/profiles.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"
#include "bemcal/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace bemcal {

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<std::size_t> scan_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

/// Nearest-medoid assignment. A medoid always belongs to its own cluster;
/// other ties go to the lower label.
std::vector<std::size_t> assign(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
    std::vector<std::size_t> labels(d.size(), 0);
    for (std::size_t j = 0; j < d.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            if (medoids[m] == j) {
                labels[j] = m;
                best      = -1.0;
                break;
            }
            if (d(j, medoids[m]) < best) {
                best      = d(j, medoids[m]);
                labels[j] = m;
            }
        }
    }
    return labels;
}

double total_cost(const DistanceMatrix& d, const std::vector<std::size_t>& medoids,
                  const std::vector<std::size_t>& labels) {
    double c = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        c += d(j, medoids[labels[j]]);
    }
    return c;
}

// Hourly shapes for the built-in nominal residential day, fraction of peak.
constexpr std::array<double, 24> kNominalOccupancy{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.8, 0.5, 0.3, 0.3, 0.3,
                                                   0.4, 0.3, 0.3, 0.3, 0.3, 0.5, 0.8, 0.9, 0.9, 0.9, 1.0, 1.0};
constexpr std::array<double, 24> kNominalLighting{0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.3, 0.5,
                                                  0.2,  0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05,
                                                  0.05, 0.4,  0.8,  1.0,  1.0,  0.9,  0.6,  0.2};
constexpr std::array<double, 24> kNominalAppliances{0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.35, 0.6,
                                                    0.4,  0.25, 0.25, 0.25, 0.45, 0.25, 0.25, 0.25,
                                                    0.25, 0.5,  0.9,  1.0,  0.8,  0.6,  0.4,  0.25};
constexpr std::array<double, 24> kNominalDhw{0.02, 0.02, 0.02, 0.02, 0.02, 0.1,  0.5, 1.0, 0.6, 0.2, 0.2, 0.2,
                                             0.3,  0.15, 0.15, 0.15, 0.15, 0.2, 0.4, 0.5, 0.4, 0.5, 0.3, 0.1};

}  // namespace

DailyMatrix clustering_input(const DayMatrix& days) {
    DailyMatrix m;
    m.resolution    = days.resolution;
    m.first_day     = days.first_day;
    m.calendar_days = days.days();
    for (std::size_t d = 0; d < days.days(); ++d) {
        if (!days.excluded[d]) {
            m.rows.push_back(days.rows[d]);
            m.day_index.push_back(d);
        }
    }
    return m;
}

DistanceMatrix::DistanceMatrix(std::span<const std::vector<double>> rows) : n_(rows.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
        if (rows[i].size() != rows.front().size()) {
            throw ValidationError("rows of unequal length");
        }
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double v  = euclidean(rows[i], rows[j]);
            d_[i * n_ + j] = v;
            d_[j * n_ + i] = v;
        }
    }
}

PamResult kmedoids(const DistanceMatrix& d, std::size_t k, std::uint64_t seed) {
    const std::size_t n = d.size();
    if (k < 1 || k > n) {
        throw ValidationError(fmt::format("k-medoids needs 1 <= k <= n (k = {}, n = {})", k, n));
    }
    const auto order = scan_order(n, seed);
    std::vector<bool> is_medoid(n, false);
    std::vector<std::size_t> medoids;
    medoids.reserve(k);

    // BUILD: the most central point, then greedy largest cost reduction.
    {
        std::size_t best = order.front();
        double best_sum  = std::numeric_limits<double>::infinity();
        for (const auto i : order) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += d(i, j);
            if (s < best_sum) {
                best_sum = s;
                best     = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = true;
    }
    std::vector<double> nearest(n);
    for (std::size_t j = 0; j < n; ++j) nearest[j] = d(j, medoids.front());
    while (medoids.size() < k) {
        std::size_t best = n;
        double best_gain = -1.0;
        for (const auto i : order) {
            if (is_medoid[i]) continue;
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j) gain += std::max(nearest[j] - d(i, j), 0.0);
            if (gain > best_gain) {
                best_gain = gain;
                best      = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = true;
        for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], d(j, best));
    }

    PamResult result;
    auto labels = assign(d, medoids);
    double cost = total_cost(d, medoids, labels);
    result.cost_history.push_back(cost);

    // SWAP
    constexpr std::size_t kMaxSwaps = 10000;
    for (std::size_t iter = 0; iter < kMaxSwaps && k < n; ++iter) {
        std::vector<double> dn(n), ds(n);
        std::vector<std::size_t> ln(n);
        for (std::size_t j = 0; j < n; ++j) {
            double a = std::numeric_limits<double>::infinity(), b = a;
            std::size_t la = 0;
            for (std::size_t m = 0; m < k; ++m) {
                const double v = d(j, medoids[m]);
                if (v < a) {
                    b  = a;
                    a  = v;
                    la = m;
                } else if (v < b) {
                    b = v;
                }
            }
            dn[j] = a;
            ds[j] = b;
            ln[j] = la;
        }
        double best_delta = 0.0;
        std::size_t best_m = k, best_h = n;
        for (std::size_t m = 0; m < k; ++m) {
            for (const auto h : order) {
                if (is_medoid[h]) continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double dh = d(j, h);
                    if (ln[j] == m) {
                        delta += std::min(ds[j], dh) - dn[j];
                    } else if (dh < dn[j]) {
                        delta += dh - dn[j];
                    }
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_m     = m;
                    best_h     = h;
                }
            }
        }
        if (best_m == k || best_delta >= -1e-12 * std::max(1.0, cost)) {
            break;
        }
        const auto previous        = medoids[best_m];
        is_medoid[previous]        = false;
        medoids[best_m]            = best_h;
        is_medoid[best_h]          = true;
        labels                     = assign(d, medoids);
        const double next          = total_cost(d, medoids, labels);
        if (next > cost) {
            // Only reachable through round-off in the delta; keep the old medoid.
            is_medoid[best_h]   = false;
            medoids[best_m]     = previous;
            is_medoid[previous] = true;
            break;
        }
        cost = next;
        result.cost_history.push_back(cost);
    }
    labels         = assign(d, medoids);
    result.medoids = std::move(medoids);
    result.cost    = total_cost(d, result.medoids, labels);
    result.assignments = std::move(labels);
    return result;
}

PamResult kmedoids(const DailyMatrix& points, std::size_t k, std::uint64_t seed) {
    return kmedoids(DistanceMatrix(points.rows), k, seed);
}

double silhouette(const DistanceMatrix& d, std::span<const std::size_t> assignments) {
    const std::size_t n = d.size();
    if (assignments.size() != n) {
        throw ValidationError("assignment count does not match the number of points");
    }
    std::map<std::size_t, std::size_t> sizes;
    for (const auto a : assignments) ++sizes[a];
    if (sizes.size() < 2) {
        throw ValidationError("silhouette needs at least two clusters");
    }
    double total = 0.0;
    std::map<std::size_t, double> sums;
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = assignments[i];
        if (sizes[own] == 1) {
            continue;
        }
        for (auto& [label, s] : sums) s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sums[assignments[j]] += d(i, j);
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b       = std::numeric_limits<double>::infinity();
        for (const auto& [label, s] : sums) {
            if (label != own) b = std::min(b, s / static_cast<double>(sizes[label]));
        }
        const double den = std::max(a, b);
        if (den > 0.0) {
            total += (b - a) / den;
        }
    }
    return total / static_cast<double>(n);
}

double silhouette(const DailyMatrix& points, std::span<const std::size_t> assignments) {
    return silhouette(DistanceMatrix(points.rows), assignments);
}

KSelection select_k(const DistanceMatrix& d, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
    const std::size_t n  = d.size();
    const std::size_t lo = std::max<std::size_t>(k_min, 2);
    const std::size_t hi = n >= 1 ? std::min(k_max, n - 1) : 0;
    if (lo > hi) {
        throw ValidationError(fmt::format("empty k range [{}, {}] for {} points", k_min, k_max, n));
    }
    KSelection sel;
    sel.score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = lo; k <= hi; ++k) {
        auto pam       = kmedoids(d, k, seed);
        const double s = silhouette(d, pam.assignments);
        sel.scores.emplace_back(k, s);
        if (s > sel.score) {
            sel.score      = s;
            sel.chosen_k   = k;
            sel.clustering = std::move(pam);
        }
    }
    return sel;
}

KSelection select_k(const DailyMatrix& points, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
    return select_k(DistanceMatrix(points.rows), k_min, k_max, seed);
}

std::string_view name(ScheduleRole r) {
    switch (r) {
        case ScheduleRole::Occupancy: return "occupancy";
        case ScheduleRole::Lighting: return "lighting";
        case ScheduleRole::Appliances: return "appliances";
        case ScheduleRole::DHW: return "dhw";
        case ScheduleRole::Infiltration: return "infiltration";
    }
    return "?";
}

ScheduleRole parse_role(std::string_view text) {
    for (const auto r : kAllRoles) {
        if (name(r) == text) return r;
    }
    throw ValidationError(fmt::format("unknown schedule role '{}'", text));
}

double RoleSchedule::value_at(Timestamp t) const {
    std::size_t cluster = 0;
    if (!day_cluster.empty()) {
        const auto offset = (day_of(t) - first_day).count();
        if (offset < 0 || offset >= static_cast<std::int64_t>(day_cluster.size())) {
            throw ValidationError(fmt::format("schedule does not cover {}", format_day(day_of(t))));
        }
        cluster = day_cluster[static_cast<std::size_t>(offset)];
    }
    const auto step = static_cast<std::size_t>(seconds_of_day(t) / step_seconds(resolution));
    return profiles[cluster][step];
}

std::vector<double> RoleSchedule::expand(Timestamp start, std::size_t steps, std::int64_t step) const {
    const auto own = step_seconds(resolution);
    std::vector<double> out(steps);
    if (step <= own) {
        if (own % step != 0) {
            throw ValidationError(fmt::format("schedule step {} s is not a multiple of {} s", own, step));
        }
        for (std::size_t i = 0; i < steps; ++i) {
            out[i] = value_at(start + std::chrono::seconds{step * static_cast<std::int64_t>(i)});
        }
        return out;
    }
    if (step % own != 0) {
        throw ValidationError(fmt::format("step {} s is not a multiple of schedule step {} s", step, own));
    }
    const auto sub = step / own;
    for (std::size_t i = 0; i < steps; ++i) {
        const auto t0 = start + std::chrono::seconds{step * static_cast<std::int64_t>(i)};
        double sum    = 0.0;
        for (std::int64_t s = 0; s < sub; ++s) sum += value_at(t0 + std::chrono::seconds{own * s});
        out[i] = sum / static_cast<double>(sub);
    }
    return out;
}

const RoleSchedule& ScheduleSet::role(ScheduleRole r) const {
    const auto it = roles.find(r);
    if (it == roles.end()) {
        throw ValidationError(fmt::format("schedule set has no {} profile", name(r)));
    }
    return it->second;
}

RoleSchedule build_schedules(const DailyMatrix& matrix, std::span<const std::size_t> assignments, std::size_t k) {
    if (matrix.rows.empty()) {
        throw ValidationError("no complete days to build profiles from");
    }
    if (assignments.size() != matrix.size()) {
        throw ValidationError("assignment count does not match the number of days");
    }
    const std::size_t width = matrix.rows.front().size();
    std::vector<std::vector<double>> means(k, std::vector<double>(width, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < matrix.size(); ++r) {
        const auto c = assignments[r];
        if (c >= k) throw ValidationError("cluster label out of range");
        ++counts[c];
        for (std::size_t s = 0; s < width; ++s) means[c][s] += matrix.rows[r][s];
    }
    double peak = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (auto& v : means[c]) {
            v /= static_cast<double>(counts[c]);
            peak = std::max(peak, v);
        }
    }
    RoleSchedule out;
    out.resolution = matrix.resolution;
    out.first_day  = matrix.first_day;
    out.chosen_k   = k;
    out.peak       = peak;
    out.profiles   = std::move(means);
    if (peak > 0.0) {
        for (auto& p : out.profiles) {
            for (auto& v : p) v = std::min(v / peak, 1.0);
        }
    }
    const auto span = std::max(matrix.calendar_days,
                               matrix.day_index.empty() ? std::size_t{0} : matrix.day_index.back() + 1);
    out.day_cluster.assign(span, 0);
    for (std::size_t r = 0; r < matrix.size(); ++r) out.day_cluster[matrix.day_index[r]] = assignments[r];
    return out;
}

RoleSchedule mine_schedule(const MeteredSeries& series, const MiningOptions& options) {
    const auto days  = reshape_daily(series);
    const auto input = clustering_input(days);
    if (input.size() == 0) {
        throw ValidationError(fmt::format("{} series has no complete day to mine profiles from",
                                          name(series.channel())));
    }
    std::vector<std::size_t> labels(input.size(), 0);
    std::size_t k    = 1;
    double score     = 0.0;
    const DistanceMatrix dist(input.rows);
    if (input.size() >= 3 && std::min(options.k_max, input.size() - 1) >= std::max<std::size_t>(options.k_min, 2)) {
        auto sel = select_k(dist, options.k_min, options.k_max, options.seed);
        k        = sel.chosen_k;
        score    = sel.score;
        labels   = sel.clustering.assignments;
    }
    auto sched       = build_schedules(input, labels, k);
    sched.silhouette = score;

    // Map excluded days onto the closest cluster mean over their observed steps.
    std::vector<std::size_t> sizes(k, 0);
    for (const auto l : labels) ++sizes[l];
    const auto largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t d = 0; d < days.days(); ++d) {
        if (!days.excluded[d]) continue;
        std::size_t best = largest;
        double best_dist = std::numeric_limits<double>::infinity();
        bool any         = false;
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t st = 0; st < days.steps_per_day; ++st) {
                const double v = days.rows[d][st];
                if (std::isnan(v)) continue;
                any            = true;
                const double e = v - sched.profiles[c][st] * sched.peak;
                s += e * e;
            }
            if (any && s < best_dist) {
                best_dist = s;
                best      = c;
            }
        }
        sched.day_cluster[d] = best;
    }
    return sched;
}

ScheduleSet mine_schedules(const MeteredSeries& electricity, const MeteredSeries& dhw, const MiningOptions& options) {
    if (electricity.resolution() != dhw.resolution()) {
        throw ValidationError("electricity and DHW series differ in resolution");
    }
    ScheduleSet set;
    set.resolution   = electricity.resolution();
    const auto elec  = mine_schedule(electricity, options);
    set.roles[ScheduleRole::Occupancy]    = elec;
    set.roles[ScheduleRole::Lighting]     = elec;
    set.roles[ScheduleRole::Appliances]   = elec;
    set.roles[ScheduleRole::DHW]          = mine_schedule(dhw, options);
    set.roles[ScheduleRole::Infiltration] = constant_schedule();
    return set;
}

RoleSchedule constant_schedule() {
    RoleSchedule s;
    s.resolution = Resolution::Daily;
    s.profiles   = {{1.0}};
    return s;
}

RoleSchedule nominal_schedule(ScheduleRole role, Resolution calibration) {
    if (role == ScheduleRole::Infiltration) {
        return constant_schedule();
    }
    if (finer_than(calibration, Resolution::Daily)) {
        log_warning(fmt::format("nominal {} profile requested for a {} calibration; mined profiles are expected",
                                name(role), name(calibration)));
    }
    const std::array<double, 24>* shape = nullptr;
    switch (role) {
        case ScheduleRole::Occupancy: shape = &kNominalOccupancy; break;
        case ScheduleRole::Lighting: shape = &kNominalLighting; break;
        case ScheduleRole::Appliances: shape = &kNominalAppliances; break;
        case ScheduleRole::DHW: shape = &kNominalDhw; break;
        case ScheduleRole::Infiltration: break;
    }
    RoleSchedule s;
    s.resolution = Resolution::Hourly;
    s.profiles   = {std::vector<double>(shape->begin(), shape->end())};
    return s;
}

ScheduleSet nominal_schedules(Resolution calibration) {
    ScheduleSet set;
    set.resolution = calibration;
    set.nominal    = true;
    for (const auto r : kAllRoles) set.roles[r] = nominal_schedule(r, calibration);
    return set;
}

namespace csv {

void write_schedule(const std::filesystem::path& profiles_path, const std::filesystem::path& days_path,
                    const RoleSchedule& schedule) {
    std::string out = "step";
    for (std::size_t c = 0; c < schedule.profiles.size(); ++c) out += fmt::format(",cluster_{}", c);
    out += '\n';
    for (std::size_t s = 0; s < schedule.steps_per_day(); ++s) {
        out += fmt::format("{}", s);
        for (const auto& p : schedule.profiles) {
            out += ',';
            out += format_number(p[s]);
        }
        out += '\n';
    }
    write_text(profiles_path, out);

    std::string days = "day,cluster\n";
    for (std::size_t d = 0; d < schedule.day_cluster.size(); ++d) {
        days += fmt::format("{},{}\n", format_day(schedule.first_day + std::chrono::days{d}),
                            schedule.day_cluster[d]);
    }
    write_text(days_path, days);
}

RoleSchedule load_schedule(const std::filesystem::path& profiles_path, const std::filesystem::path& days_path,
                           Resolution resolution) {
    RoleSchedule s;
    s.resolution     = resolution;
    const auto lines = read_lines(profiles_path);
    if (lines.empty() || !lines.front().starts_with("step")) {
        throw ValidationError(fmt::format("{}:1: expected header 'step,cluster_0,...'", profiles_path.string()));
    }
    const auto k = split(lines.front()).size() - 1;
    s.profiles.assign(k, {});
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto where  = fmt::format("{}:{}", profiles_path.string(), ln + 1);
        const auto fields = split(lines[ln]);
        if (fields.size() != k + 1) throw ValidationError(fmt::format("{}: expected {} fields", where, k + 1));
        for (std::size_t c = 0; c < k; ++c) {
            const auto v = parse_number(fields[c + 1], where);
            if (!v || *v < 0.0 || *v > 1.0) throw ValidationError(fmt::format("{}: profile value outside [0, 1]", where));
            s.profiles[c].push_back(*v);
        }
    }
    s.chosen_k = k;
    const auto expected_steps =
        is_calendar(resolution) ? 0 : static_cast<std::size_t>(86400 / step_seconds(resolution));
    if (s.steps_per_day() != expected_steps) {
        throw ValidationError(fmt::format("{}: {} steps per day, expected {} for {}", profiles_path.string(),
                                          s.steps_per_day(), expected_steps, name(resolution)));
    }
    const auto day_lines = read_lines(days_path);
    if (day_lines.empty() || day_lines.front() != "day,cluster") {
        throw ValidationError(fmt::format("{}:1: expected header 'day,cluster'", days_path.string()));
    }
    for (std::size_t ln = 1; ln < day_lines.size(); ++ln) {
        if (day_lines[ln].empty()) continue;
        const auto where  = fmt::format("{}:{}", days_path.string(), ln + 1);
        const auto fields = split(day_lines[ln]);
        if (fields.size() != 2) throw ValidationError(fmt::format("{}: expected 2 fields", where));
        const auto day = day_of(parse_timestamp(std::string(fields[0]) + "T00:00:00Z"));
        if (s.day_cluster.empty()) {
            s.first_day = day;
        } else if (day != s.first_day + std::chrono::days{s.day_cluster.size()}) {
            throw ValidationError(fmt::format("{}: days must be consecutive", where));
        }
        const auto c = parse_number(fields[1], where);
        if (!c || *c < 0 || static_cast<std::size_t>(*c) >= k) {
            throw ValidationError(fmt::format("{}: cluster label out of range", where));
        }
        s.day_cluster.push_back(static_cast<std::size_t>(*c));
    }
    return s;
}

}  // namespace csv

}  // namespace bemcal
