#pragma once

// Correspondence between the named scar classes of the heart and Africa billiards and the
// length-ordered labels produced by the orbit search (512 seeds, up to five bounces).
// Pinned once by inspecting the orbit geometry and the detected scars; the length and
// winding columns guard against the search relabelling orbits.

#include <string>
#include <vector>

namespace fixtures {

struct ScarClass {
    std::string name;   // class name used in reports
    std::string label;  // orbit label from the catalog
    double length;      // orbit length L, for a consistency check
    int winding;        // |W| of the CCW orbit
    bool odd;           // odd bounce count
};

inline const std::vector<ScarClass>& heart_classes() {
    static const std::vector<ScarClass> v{
        {"period-2", "period-2-II", 4.2425, 0, false},
        {"period-3", "period-3-II", 5.3764, 1, true},
        {"period-4-I", "period-4-V", 7.5424, 0, false},
        {"period-4-II", "period-4-II", 5.7998, 1, false},
        {"period-5-I", "period-5-V", 8.4733, 0, true},
        {"period-5-II", "period-5-VII", 9.7840, 2, true},
    };
    return v;
}

inline const std::vector<ScarClass>& africa_classes() {
    static const std::vector<ScarClass> v{
        {"period-2", "period-2-IV", 4.4095, 0, false},
        {"period-3-I", "period-3-V", 5.1129, 1, true},
        {"period-3-II", "period-3-VI", 5.5268, 1, true},
        {"period-4-I", "period-4-III", 5.8344, 1, false},
        {"period-4-II", "period-4-IV", 5.8736, 1, false},
        {"period-5", "period-5-IV", 5.9150, 1, true},
    };
    return v;
}

}  // namespace fixtures
