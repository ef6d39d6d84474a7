#pragma once

#include <span>
#include <string>
#include <vector>

#include "lmforecast/metrics.hpp"
#include "lmforecast/session.hpp"

namespace lmforecast {

// Minimal self-contained SVG emitter; no external renderer dependencies.
class SvgCanvas {
public:
    SvgCanvas(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0, const std::string& dash = "");
    void polyline(std::span<const double> xs, std::span<const double> ys,
                  const std::string& stroke, double stroke_width = 1.0);
    void circle(double cx, double cy, double r, const std::string& fill);
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none");
    void text(double x, double y, const std::string& content, double size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#333333");

    std::string str() const;

private:
    double width_;
    double height_;
    std::string body_;
};

/// Linear data-to-pixel mapping.
struct LinearScale {
    double domain_min = 0.0;
    double domain_max = 1.0;
    double range_min = 0.0;
    double range_max = 1.0;

    double operator()(double v) const;
};

/// Round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target_count = 6);

// ============================================================================
// Plot builders (each returns a complete SVG document)
// ============================================================================

/// Train/validation MSE per epoch on a log axis, with the returned epoch marked.
std::string performance_curve_svg(const TrainTrace& trace);

/// Bar chart of the test-error histogram.
std::string error_histogram_svg(std::span<const HistogramBin> bins);

/// Target-vs-prediction scatter with a least-squares line and an R annotation.
std::string regression_scatter_svg(std::span<const double> targets,
                                   std::span<const double> predictions, double r_value);

/// Targets and predictions over time with the error series beneath.
std::string response_series_svg(std::span<const double> targets,
                                std::span<const double> predictions, std::size_t t0);

/// Stem plot of the error autocovariance with its white-noise confidence band.
std::string autocorrelation_svg(const Autocorrelation& autocorr);

} // namespace lmforecast
