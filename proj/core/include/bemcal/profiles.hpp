#pragma once

#include "bemcal/resolution.hpp"
#include "bemcal/series.hpp"
#include "bemcal/time.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace bemcal {

/// Complete day vectors used as clustering input; days with missing values are
/// not present.
struct DailyMatrix {
    Resolution resolution{Resolution::Hourly};
    Day first_day{};
    std::size_t calendar_days{0};  ///< span of the source, including excluded days
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> day_index;  ///< offset of each row from first_day

    std::size_t size() const { return rows.size(); }
};

/// Keeps the non-excluded rows of a reshaped series.
DailyMatrix clustering_input(const DayMatrix& days);

/// Symmetric matrix of Euclidean distances between rows.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::span<const std::vector<double>> rows);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

private:
    std::size_t n_{0};
    std::vector<double> d_;
};

struct PamResult {
    std::vector<std::size_t> medoids;      ///< row indices, cluster label = position
    std::vector<std::size_t> assignments;  ///< cluster label per row
    double cost{0.0};                      ///< sum of distances to assigned medoid
    std::vector<double> cost_history;      ///< after BUILD, then after each accepted swap
};

/// PAM (BUILD + SWAP) k-medoids. BUILD is greedy; SWAP applies the best
/// improving medoid/non-medoid exchange until none improves. The seed fixes a
/// scan order that only decides between exactly tied candidates.
PamResult kmedoids(const DistanceMatrix& distances, std::size_t k, std::uint64_t seed);
PamResult kmedoids(const DailyMatrix& points, std::size_t k, std::uint64_t seed);

/// Mean silhouette width; singleton clusters score 0, as do points with
/// a = b = 0. Requires at least two non-empty clusters.
double silhouette(const DistanceMatrix& distances, std::span<const std::size_t> assignments);
double silhouette(const DailyMatrix& points, std::span<const std::size_t> assignments);

struct KSelection {
    std::size_t chosen_k{0};
    double score{0.0};
    std::vector<std::pair<std::size_t, double>> scores;  ///< (k, silhouette) per candidate
    PamResult clustering;                                 ///< clustering at chosen_k
};

/// Runs k-medoids for k in [k_min, min(k_max, n - 1)] and keeps the k with the
/// highest mean silhouette; ties go to the smaller k.
KSelection select_k(const DistanceMatrix& distances, std::size_t k_min, std::size_t k_max, std::uint64_t seed);
KSelection select_k(const DailyMatrix& points, std::size_t k_min, std::size_t k_max, std::uint64_t seed);

enum class ScheduleRole : std::uint8_t { Occupancy, Lighting, Appliances, DHW, Infiltration };

inline constexpr std::array<ScheduleRole, 5> kAllRoles{ScheduleRole::Occupancy, ScheduleRole::Lighting,
                                                        ScheduleRole::Appliances, ScheduleRole::DHW,
                                                        ScheduleRole::Infiltration};

std::string_view name(ScheduleRole r);
ScheduleRole parse_role(std::string_view text);

/// Typical daily profiles for one role: fraction-of-peak values per step of
/// the day, and the profile each calendar day follows.
struct RoleSchedule {
    Resolution resolution{Resolution::Hourly};
    Day first_day{};
    std::vector<std::vector<double>> profiles;
    std::vector<std::size_t> day_cluster;  ///< empty: every day uses profile 0
    std::size_t chosen_k{1};
    double silhouette{0.0};
    double peak{1.0};  ///< energy per step that maps to 1.0 (bookkeeping only)

    std::size_t steps_per_day() const { return profiles.empty() ? 0 : profiles.front().size(); }

    /// Profile value at absolute time `t` (step-hold within the day).
    double value_at(Timestamp t) const;

    /// Per-step values over `steps` steps of length `step` seconds from `start`.
    /// Finer steps hold the profile value; coarser steps average it.
    std::vector<double> expand(Timestamp start, std::size_t steps, std::int64_t step) const;
};

/// Schedules for every role at one calibration resolution.
struct ScheduleSet {
    Resolution resolution{Resolution::Hourly};
    bool nominal{false};
    std::map<ScheduleRole, RoleSchedule> roles;

    const RoleSchedule& role(ScheduleRole r) const;
};

/// Cluster-mean profiles normalized by the largest value over all clusters,
/// so every value lies in [0, 1] and the overall maximum is 1 (an all-zero
/// input stays zero).
RoleSchedule build_schedules(const DailyMatrix& matrix, std::span<const std::size_t> assignments, std::size_t k);

struct MiningOptions {
    std::size_t k_min{2};
    std::size_t k_max{10};
    std::uint64_t seed{0};
};

/// Reshape, cluster with silhouette-selected k, build profiles, then map every
/// calendar day (including days excluded for missing data) to a cluster.
/// Excluded days go to the nearest cluster mean over their observed steps.
RoleSchedule mine_schedule(const MeteredSeries& series, const MiningOptions& options);

/// Occupancy, lighting and appliances follow the electricity profile; DHW is
/// mined from its own channel; infiltration is constant.
ScheduleSet mine_schedules(const MeteredSeries& electricity, const MeteredSeries& dhw, const MiningOptions& options);

/// Built-in residential hourly profile (constant across days) used for
/// Daily and Monthly calibrations. Infiltration is a constant 1.0. Requesting
/// it for a finer calibration logs a warning, since mined profiles are expected.
RoleSchedule nominal_schedule(ScheduleRole role, Resolution calibration);
ScheduleSet nominal_schedules(Resolution calibration);

/// Constant 1.0 at one step per day granularity.
RoleSchedule constant_schedule();

namespace csv {

/// `step,cluster_0,...` profile file and `day,cluster` assignment file.
void write_schedule(const std::filesystem::path& profiles_path, const std::filesystem::path& days_path,
                    const RoleSchedule& schedule);
RoleSchedule load_schedule(const std::filesystem::path& profiles_path, const std::filesystem::path& days_path,
                           Resolution resolution);

}  // namespace csv

}  // namespace bemcal
