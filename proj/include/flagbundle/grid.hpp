#pragma once

#include "flagbundle/types.hpp"

namespace flagbundle {

/// Polar evaluation grid: radii x equispaced angles; r = 0 is emitted once.
struct PolarGrid {
    std::vector<double> radii;
    int angles = 16;

    struct Point {
        double r;
        double theta;
        Complex w;
    };

    static PolarGrid default_grid();  // radii 0, 0.1, ..., 0.8; 16 angles

    std::vector<Point> entries() const;
    std::size_t size() const;
};

inline PolarGrid PolarGrid::default_grid() {
    PolarGrid g;
    for (int k = 0; k <= 8; ++k) g.radii.push_back(0.1 * k);
    g.angles = 16;
    return g;
}

inline std::vector<PolarGrid::Point> PolarGrid::entries() const {
    std::vector<Point> pts;
    for (double r : radii) {
        if (r == 0.0) {
            pts.push_back({0.0, 0.0, Complex(0, 0)});
            continue;
        }
        for (int a = 0; a < angles; ++a) {
            double th = 2.0 * M_PI * a / angles;
            pts.push_back({r, th, std::polar(r, th)});
        }
    }
    return pts;
}

inline std::size_t PolarGrid::size() const { return entries().size(); }

}  // namespace flagbundle
