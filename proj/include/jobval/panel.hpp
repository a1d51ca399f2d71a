#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace jobval {

// Sentinel employer id for non-employment records.
inline constexpr int kNonEmployment = -1;

// One worker-year observation: the matched-data atom. Wages are log
// average earnings per hour and are present iff the worker is employed
// (NaN otherwise). Spell days are 1-based within the period.
struct PanelRecord {
    int64_t worker_id = 0;
    int period = 0;
    int employer_id = kNonEmployment;
    double log_wage = std::numeric_limits<double>::quiet_NaN();
    int age = 0;
    int gender = 0;     // 0/1
    int education = 0;  // 0 = non-college, 1 = college
    int spell_start_day = 1;
    int spell_end_day = 365;

    bool employed() const { return employer_id != kNonEmployment; }
};

inline constexpr int kDaysPerPeriod = 365;

}  // namespace jobval
