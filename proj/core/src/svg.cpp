#include "lmforecast/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lmforecast {

namespace {

std::string num(double v) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

std::string escape_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

// Axis frame, grid, and tick labels drawn into a rectangle of an existing canvas.
struct Chart {
    SvgCanvas& canvas;
    LinearScale x;
    LinearScale y;
    double left, right, top, bottom;

    Chart(SvgCanvas& target, double px_left, double px_top, double px_right, double px_bottom,
          double x_min, double x_max, double y_min, double y_max, const std::string& title,
          const std::string& x_label, const std::string& y_label)
        : canvas(target), left(px_left), right(px_right), top(px_top), bottom(px_bottom) {
        if (x_max <= x_min) x_max = x_min + 1.0;
        if (y_max <= y_min) y_max = y_min + 1.0;
        x = {x_min, x_max, left, right};
        y = {y_min, y_max, bottom, top}; // pixel y grows downward
        canvas.rect(left, top, right - left, bottom - top, "#fdfdfd", "#888888");
        if (!title.empty()) {
            canvas.text((left + right) / 2.0, top - 10, title, 13, "middle");
        }
        if (!x_label.empty()) {
            canvas.text((left + right) / 2.0, bottom + 30, x_label, 11, "middle");
        }
        if (!y_label.empty()) {
            canvas.text(14, (top + bottom) / 2.0, y_label, 11, "middle");
        }
        for (double tick : nice_ticks(x_min, x_max)) {
            const double px = x(tick);
            canvas.line(px, bottom, px, bottom + 4, "#888888");
            canvas.text(px, bottom + 16, num(tick), 10, "middle");
        }
        for (double tick : nice_ticks(y_min, y_max)) {
            const double py = y(tick);
            canvas.line(left - 4, py, left, py, "#888888");
            canvas.text(left - 6, py + 3, num(tick), 10, "end");
            canvas.line(left, py, right, py, "#eeeeee");
        }
    }
};

} // namespace

// ============================================================================
// SvgCanvas
// ============================================================================

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width, const std::string& dash) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) + "\"";
    if (!dash.empty()) {
        body_ += " stroke-dasharray=\"" + dash + "\"";
    }
    body_ += "/>\n";
}

void SvgCanvas::polyline(std::span<const double> xs, std::span<const double> ys,
                         const std::string& stroke, double stroke_width) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(stroke_width) + "\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0) body_ += ' ';
        body_ += num(xs[i]) + "," + num(ys[i]);
    }
    body_ += "\"/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
             "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& content, double size,
                     const std::string& anchor, const std::string& fill) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill +
             "\">" + escape_text(content) + "</text>\n";
}

std::string SvgCanvas::str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n" +
           body_ + "</svg>\n";
}

double LinearScale::operator()(double v) const {
    const double t = (v - domain_min) / (domain_max - domain_min);
    return range_min + t * (range_max - range_min);
}

std::vector<double> nice_ticks(double lo, double hi, int target_count) {
    if (hi <= lo || target_count < 2) {
        return {lo, hi};
    }
    const double raw_step = (hi - lo) / static_cast<double>(target_count);
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = magnitude;
    for (double multiple : {1.0, 2.0, 5.0, 10.0}) {
        if (magnitude * multiple >= raw_step) {
            step = magnitude * multiple;
            break;
        }
    }
    std::vector<double> ticks;
    for (double tick = std::ceil(lo / step) * step; tick <= hi + step * 1e-9; tick += step) {
        ticks.push_back(std::abs(tick) < step * 1e-9 ? 0.0 : tick);
    }
    return ticks;
}

// ============================================================================
// Plot builders
// ============================================================================

std::string performance_curve_svg(const TrainTrace& trace) {
    std::vector<double> epochs, train_log, validation_log;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const TraceRow& row : trace.rows) {
        if (row.train_mse <= 0.0 || row.validation_mse <= 0.0) {
            continue; // log axis
        }
        epochs.push_back(static_cast<double>(row.epoch));
        train_log.push_back(std::log10(row.train_mse));
        validation_log.push_back(std::log10(row.validation_mse));
        const double row_lo = std::min(train_log.back(), validation_log.back());
        const double row_hi = std::max(train_log.back(), validation_log.back());
        lo = first ? row_lo : std::min(lo, row_lo);
        hi = first ? row_hi : std::max(hi, row_hi);
        first = false;
    }
    const double x_max = trace.rows.empty() ? 1.0 : static_cast<double>(trace.rows.back().epoch);

    SvgCanvas canvas(640, 400);
    canvas.rect(0, 0, 640, 400, "#ffffff");
    Chart chart(canvas, 58, 30, 624, 360, 0.0, std::max(1.0, x_max), lo - 0.2, hi + 0.2,
                "Training performance (log10 MSE per epoch)", "epoch", "log10 MSE");

    std::vector<double> train_px(epochs.size()), train_py(epochs.size());
    std::vector<double> val_px(epochs.size()), val_py(epochs.size());
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        train_px[i] = chart.x(epochs[i]);
        train_py[i] = chart.y(train_log[i]);
        val_px[i] = chart.x(epochs[i]);
        val_py[i] = chart.y(validation_log[i]);
    }
    canvas.polyline(train_px, train_py, "#1f77b4", 1.5);
    canvas.polyline(val_px, val_py, "#2ca02c", 1.5);
    if (static_cast<std::size_t>(trace.best_epoch) < trace.rows.size()) {
        const TraceRow& best = trace.rows[static_cast<std::size_t>(trace.best_epoch)];
        if (best.validation_mse > 0.0) {
            const double bx = chart.x(static_cast<double>(best.epoch));
            const double by = chart.y(std::log10(best.validation_mse));
            canvas.circle(bx, by, 4.0, "#d62728");
            canvas.text(bx + 6, by - 6, "returned epoch " + std::to_string(best.epoch), 10);
        }
    }
    canvas.text(chart.right - 8, chart.top + 14, "train", 10, "end", "#1f77b4");
    canvas.text(chart.right - 8, chart.top + 27, "validation", 10, "end", "#2ca02c");
    return canvas.str();
}

std::string error_histogram_svg(std::span<const HistogramBin> bins) {
    double lo = 0.0, hi = 1.0;
    std::size_t max_count = 1;
    if (!bins.empty()) {
        lo = bins.front().lower;
        hi = bins.back().upper;
        for (const HistogramBin& bin : bins) {
            max_count = std::max(max_count, bin.count);
        }
    }
    SvgCanvas canvas(640, 400);
    canvas.rect(0, 0, 640, 400, "#ffffff");
    Chart chart(canvas, 58, 30, 624, 360, lo, hi, 0.0, static_cast<double>(max_count) * 1.05,
                "Test error histogram", "error (bpm)", "count");
    for (const HistogramBin& bin : bins) {
        const double x0 = chart.x(bin.lower);
        const double x1 = chart.x(bin.upper);
        const double y0 = chart.y(static_cast<double>(bin.count));
        canvas.rect(x0, y0, std::max(0.5, x1 - x0 - 0.5), chart.bottom - y0, "#1f77b4", "#0d3a5c");
    }
    const double zero_px = chart.x(0.0);
    if (zero_px >= chart.left && zero_px <= chart.right) {
        canvas.line(zero_px, chart.top, zero_px, chart.bottom, "#d62728", 1.0, "4,3");
    }
    return canvas.str();
}

std::string regression_scatter_svg(std::span<const double> targets,
                                   std::span<const double> predictions, double r_value) {
    double lo = targets.empty() ? 0.0 : targets[0];
    double hi = lo + 1.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        lo = std::min({lo, targets[i], predictions[i]});
        hi = std::max({hi, targets[i], predictions[i]});
    }
    SvgCanvas canvas(480, 480);
    canvas.rect(0, 0, 480, 480, "#ffffff");
    Chart chart(canvas, 58, 30, 464, 440, lo, hi, lo, hi, "Prediction vs target", "target (bpm)",
                "prediction (bpm)");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        canvas.circle(chart.x(targets[i]), chart.y(predictions[i]), 1.6, "#1f77b4");
    }
    // Least-squares fit of prediction on target.
    if (targets.size() >= 2) {
        double mean_t = 0.0, mean_p = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            mean_t += targets[i];
            mean_p += predictions[i];
        }
        mean_t /= static_cast<double>(targets.size());
        mean_p /= static_cast<double>(targets.size());
        double cov = 0.0, var_t = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            cov += (targets[i] - mean_t) * (predictions[i] - mean_p);
            var_t += (targets[i] - mean_t) * (targets[i] - mean_t);
        }
        if (var_t > 0.0) {
            const double slope = cov / var_t;
            const double intercept = mean_p - slope * mean_t;
            canvas.line(chart.x(lo), chart.y(slope * lo + intercept), chart.x(hi),
                        chart.y(slope * hi + intercept), "#d62728", 1.5);
        }
    }
    canvas.line(chart.x(lo), chart.y(lo), chart.x(hi), chart.y(hi), "#999999", 1.0, "5,4");
    char annotation[32];
    std::snprintf(annotation, sizeof(annotation), "R = %.4f", r_value);
    canvas.text(chart.left + 10, chart.top + 16, annotation, 12);
    return canvas.str();
}

std::string response_series_svg(std::span<const double> targets,
                                std::span<const double> predictions, std::size_t t0) {
    const std::size_t n = targets.size();
    double lo = n ? targets[0] : 0.0;
    double hi = lo + 1.0;
    double err_extent = 1e-12;
    std::vector<double> xs(n), errors(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = static_cast<double>(t0 + i);
        errors[i] = targets[i] - predictions[i];
        lo = std::min({lo, targets[i], predictions[i]});
        hi = std::max({hi, targets[i], predictions[i]});
        err_extent = std::max(err_extent, std::abs(errors[i]));
    }
    const double x_min = n ? xs.front() : 0.0;
    const double x_max = n ? xs.back() : 1.0;

    // Two stacked panels sharing the x axis: response above, errors below.
    SvgCanvas canvas(820, 560);
    canvas.rect(0, 0, 820, 560, "#ffffff");
    Chart response(canvas, 58, 30, 804, 330, x_min, x_max, lo, hi,
                   "Response: target and one-step prediction", "", "bpm");
    std::vector<double> px(n), target_py(n), prediction_py(n), error_py(n);
    for (std::size_t i = 0; i < n; ++i) {
        px[i] = response.x(xs[i]);
        target_py[i] = response.y(targets[i]);
        prediction_py[i] = response.y(predictions[i]);
    }
    canvas.polyline(px, target_py, "#1f77b4", 1.2);
    canvas.polyline(px, prediction_py, "#d62728", 1.2);
    canvas.text(response.right - 8, response.top + 14, "target", 10, "end", "#1f77b4");
    canvas.text(response.right - 8, response.top + 27, "prediction", 10, "end", "#d62728");

    Chart error_panel(canvas, 58, 400, 804, 520, x_min, x_max, -err_extent * 1.1,
                      err_extent * 1.1, "", "time (s)", "error (bpm)");
    for (std::size_t i = 0; i < n; ++i) {
        error_py[i] = error_panel.y(errors[i]);
    }
    canvas.line(error_panel.left, error_panel.y(0.0), error_panel.right, error_panel.y(0.0),
                "#555555", 1.0);
    canvas.polyline(px, error_py, "#ff7f0e", 1.0);
    return canvas.str();
}

std::string autocorrelation_svg(const Autocorrelation& autocorr) {
    const std::size_t lags = autocorr.covariance.size();
    double lo = 0.0, hi = 0.0;
    for (double c : autocorr.covariance) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    lo = std::min(lo, -autocorr.confidence_limit);
    hi = std::max(hi, autocorr.confidence_limit);
    const double pad = (hi - lo) * 0.08 + 1e-12;
    SvgCanvas canvas(640, 400);
    canvas.rect(0, 0, 640, 400, "#ffffff");
    Chart chart(canvas, 58, 30, 624, 360, -0.5,
                static_cast<double>(lags > 0 ? lags - 1 : 1) + 0.5, lo - pad, hi + pad,
                "Test error autocovariance", "lag", "covariance");
    const double zero_py = chart.y(0.0);
    canvas.line(chart.left, zero_py, chart.right, zero_py, "#555555", 1.0);
    const double conf_hi = chart.y(autocorr.confidence_limit);
    const double conf_lo = chart.y(-autocorr.confidence_limit);
    canvas.line(chart.left, conf_hi, chart.right, conf_hi, "#d62728", 1.0, "5,4");
    canvas.line(chart.left, conf_lo, chart.right, conf_lo, "#d62728", 1.0, "5,4");
    for (std::size_t k = 0; k < lags; ++k) {
        const double px = chart.x(static_cast<double>(k));
        const double py = chart.y(autocorr.covariance[k]);
        canvas.line(px, zero_py, px, py, "#1f77b4", 1.5);
        canvas.circle(px, py, 2.2, "#1f77b4");
    }
    return canvas.str();
}

} // namespace lmforecast
