#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rankbench/aggregation.hpp"
#include "rankbench/stats.hpp"

namespace rankbench {

// Static SVG emission for the two plot types. Presentational only; numeric
// outputs live in the JSON plot-data documents.

namespace detail {

inline const char* plot_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                    "#aec7e8"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace detail

inline std::string render_dm_curves(const PerformanceProfile& prof, int width = 640, int height = 420) {
    const double lx = 60, rx = width - 160.0, ty = 20, by = height - 50.0;
    const double bmax = prof.beta_hat;
    auto sx = [&](double beta) { return lx + (beta - 1.0) / std::max(bmax - 1.0, 1e-9) * (rx - lx); };
    auto sy = [&](double p) { return by - p * (by - ty); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << lx << "\" y1=\"" << by << "\" x2=\"" << rx << "\" y2=\"" << by
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << lx << "\" y1=\"" << ty << "\" x2=\"" << lx << "\" y2=\"" << by
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (lx + rx) / 2 << "\" y=\"" << height - 12 << "\" font-size=\"12\">beta</text>\n";

    for (std::size_t i = 0; i < prof.methods.size(); ++i) {
        std::ostringstream pts;
        double p = prof.value_at(i, 1.0);
        pts << detail::fmt(sx(1.0)) << "," << detail::fmt(sy(p));
        for (const double bp : prof.breakpoints[i]) {
            if (bp <= 1.0) continue;
            const double p_before = prof.value_at(i, std::nexttoward(bp, 0.0));
            pts << " " << detail::fmt(sx(bp)) << "," << detail::fmt(sy(p_before));
            p = prof.value_at(i, bp);
            pts << " " << detail::fmt(sx(bp)) << "," << detail::fmt(sy(p));
        }
        pts << " " << detail::fmt(sx(bmax)) << "," << detail::fmt(sy(p));
        svg << "<polyline fill=\"none\" stroke=\"" << detail::plot_color(i) << "\" points=\"" << pts.str()
            << "\"/>\n";
        svg << "<text x=\"" << rx + 8 << "\" y=\"" << ty + 16.0 * static_cast<double>(i + 1)
            << "\" font-size=\"11\" fill=\"" << detail::plot_color(i) << "\">" << prof.methods[i]
            << " (" << detail::fmt(prof.normalized_area[i]) << ")</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

inline std::string render_cd_diagram(const CdDiagramData& data, int width = 640) {
    const std::size_t m = data.methods.size();
    const double lx = 40, rx = width - 40.0, axis_y = 60;
    const double rank_lo = 1.0;
    const double rank_hi = std::max(static_cast<double>(m), 2.0);
    auto sx = [&](double rank) { return lx + (rank - rank_lo) / (rank_hi - rank_lo) * (rx - lx); };

    const std::size_t n_cliques = data.wilcoxon_cliques.size() + data.bayes_cliques.size();
    const int height = static_cast<int>(axis_y + 20.0 * static_cast<double>(n_cliques) +
                                        18.0 * static_cast<double>((m + 1) / 2) + 60.0);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << lx << "\" y1=\"" << axis_y << "\" x2=\"" << rx << "\" y2=\"" << axis_y
        << "\" stroke=\"black\"/>\n";
    for (std::size_t r = 1; r <= static_cast<std::size_t>(rank_hi); ++r) {
        svg << "<line x1=\"" << sx(static_cast<double>(r)) << "\" y1=\"" << axis_y - 4 << "\" x2=\""
            << sx(static_cast<double>(r)) << "\" y2=\"" << axis_y + 4 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << sx(static_cast<double>(r)) - 3 << "\" y=\"" << axis_y - 10
            << "\" font-size=\"11\">" << r << "</text>\n";
    }

    // method stems alternate above label rows left/right for readability
    for (std::size_t i = 0; i < m; ++i) {
        const double x = sx(data.mean_ranks[i]);
        const double label_y = axis_y + 20.0 * static_cast<double>(n_cliques) + 24.0 +
                               18.0 * static_cast<double>(i / 2);
        const double anchor_x = i % 2 == 0 ? lx : rx;
        svg << "<line x1=\"" << x << "\" y1=\"" << axis_y << "\" x2=\"" << x << "\" y2=\""
            << label_y - 10 << "\" stroke=\"#888\"/>\n";
        svg << "<line x1=\"" << x << "\" y1=\"" << label_y - 10 << "\" x2=\"" << anchor_x
            << "\" y2=\"" << label_y - 10 << "\" stroke=\"#888\"/>\n";
        svg << "<text x=\"" << (i % 2 == 0 ? lx : rx - 120) << "\" y=\"" << label_y
            << "\" font-size=\"11\">" << data.methods[i] << " (" << detail::fmt(data.mean_ranks[i])
            << ")</text>\n";
    }

    double bar_y = axis_y + 14;
    auto draw_cliques = [&](const std::vector<std::vector<std::size_t>>& cliques, bool dashed) {
        for (const auto& clique : cliques) {
            double lo = 1e300, hi = -1e300;
            for (const auto i : clique) {
                lo = std::min(lo, data.mean_ranks[i]);
                hi = std::max(hi, data.mean_ranks[i]);
            }
            svg << "<line x1=\"" << sx(lo) - 3 << "\" y1=\"" << bar_y << "\" x2=\"" << sx(hi) + 3
                << "\" y2=\"" << bar_y << "\" stroke=\"black\" stroke-width=\"4\""
                << (dashed ? " stroke-dasharray=\"6,4\" stroke=\"#555\"" : "") << "/>\n";
            bar_y += 20;
        }
    };
    draw_cliques(data.wilcoxon_cliques, false);
    draw_cliques(data.bayes_cliques, true);
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace rankbench
