#include "fnolab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fnolab {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string render_csv(const ComparisonReport& report) {
    std::string out = "curve,mode,empirical_mean,empirical_std,theory,in_band\n";
    for (const auto& c : report.curves)
        for (const auto& r : c.rows) {
            out += c.label;
            out += ',';
            out += std::to_string(r.mode);
            out += ',';
            out += format_double(r.empirical_mean);
            out += ',';
            out += format_double(r.empirical_std);
            out += ',';
            out += format_double(r.theory);
            out += ',';
            out += r.in_band ? '1' : '0';
            out += '\n';
        }
    return out;
}

std::string render_json(const ComparisonReport& report) {
    ordered_json j;
    j["scenario"] = report.scenario;
    j["kind"] = report.kind;
    ordered_json prov;
    prov["root_seed"] = report.root_seed;
    prov["replicas"] = report.replicas;
    prov["width"] = report.width;
    prov["depth"] = report.depth;
    prov["activation"] = report.activation;
    prov["interpretation"] = report.interpretation;
    prov["k_stop"] = report.k_stop;
    prov["band_multiplier"] = report.band_multiplier;
    prov["min_in_band_fraction"] = report.min_in_band_fraction;
    prov["band_modes"] = {report.band_lo, report.band_hi};
    prov["grf_length_scale"] = report.grf_length_scale;
    prov["grf_amplitude"] = report.grf_amplitude;
    prov["cr_level"] = report.cr_level;
    if (report.gamma_tilde) prov["gamma_tilde"] = *report.gamma_tilde;
    if (report.epsilon) prov["epsilon"] = *report.epsilon;
    for (const auto& [k, v] : report.extra) prov[k] = v;
    j["provenance"] = prov;
    ordered_json curves = ordered_json::array();
    for (const auto& c : report.curves) {
        ordered_json jc;
        jc["label"] = c.label;
        jc["in_band_fraction"] = c.in_band_fraction;
        jc["passed"] = c.passed;
        ordered_json rows = ordered_json::array();
        for (const auto& r : c.rows)
            rows.push_back({{"mode", r.mode},
                            {"mean", r.empirical_mean},
                            {"std", r.empirical_std},
                            {"theory", r.theory},
                            {"in_band", r.in_band},
                            {"counted", r.counted}});
        jc["rows"] = rows;
        curves.push_back(jc);
    }
    j["curves"] = curves;
    j["aggregate_pass"] = report.aggregate_pass;
    return j.dump(2) + "\n";
}

namespace {

struct LogScale {
    double lo = 0.0, hi = 1.0;
    double x0, x1, y0, y1;
    double fx(double mode, double mode_lo, double mode_hi) const {
        return x0 + (x1 - x0) * (mode - mode_lo) / std::max(1.0, mode_hi - mode_lo);
    }
    double fy(double v) const {
        const double lv = std::log10(std::max(v, 1e-300));
        return y1 - (y1 - y0) * (lv - lo) / (hi - lo);
    }
};

void polyline(std::string& svg, const std::vector<std::pair<double, double>>& pts,
              const char* style) {
    svg += "<polyline fill=\"none\" style=\"";
    svg += style;
    svg += "\" points=\"";
    for (const auto& [x, y] : pts) {
        svg += format_double(std::round(x * 100) / 100);
        svg += ',';
        svg += format_double(std::round(y * 100) / 100);
        svg += ' ';
    }
    svg += "\"/>\n";
}

}  // namespace

std::string render_svg(const ComparisonReport& report) {
    const double W = 760, H = 480;
    LogScale sc;
    sc.x0 = 70;
    sc.x1 = W - 20;
    sc.y0 = 30;
    sc.y1 = H - 50;

    double vmin = 1e300, vmax = -1e300;
    double mlo = 1e300, mhi = -1e300;
    for (const auto& c : report.curves)
        for (const auto& r : c.rows) {
            mlo = std::min(mlo, static_cast<double>(r.mode));
            mhi = std::max(mhi, static_cast<double>(r.mode));
            for (double v : {r.empirical_mean, r.theory})
                if (v > 0.0) {
                    vmin = std::min(vmin, v);
                    vmax = std::max(vmax, v);
                }
        }
    if (!(vmax > 0.0)) {
        vmin = 1e-1;
        vmax = 1.0;
    }
    vmin = std::max(vmin, vmax * 1e-30);
    sc.lo = std::floor(std::log10(vmin)) - 0.5;
    sc.hi = std::ceil(std::log10(vmax)) + 0.5;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(W) +
           "\" height=\"" + format_double(H) + "\" viewBox=\"0 0 " + format_double(W) + " " +
           format_double(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_double(W / 2) + "\" y=\"18\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + report.scenario + "</text>\n";

    // axes and decade ticks
    svg += "<line x1=\"" + format_double(sc.x0) + "\" y1=\"" + format_double(sc.y1) +
           "\" x2=\"" + format_double(sc.x1) + "\" y2=\"" + format_double(sc.y1) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(sc.x0) + "\" y1=\"" + format_double(sc.y0) +
           "\" x2=\"" + format_double(sc.x0) + "\" y2=\"" + format_double(sc.y1) +
           "\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(std::ceil(sc.lo)); d <= static_cast<int>(std::floor(sc.hi));
         d += std::max(1, static_cast<int>((sc.hi - sc.lo) / 10))) {
        const double y = sc.fy(std::pow(10.0, d));
        svg += "<line x1=\"" + format_double(sc.x0 - 4) + "\" y1=\"" + format_double(y) +
               "\" x2=\"" + format_double(sc.x0) + "\" y2=\"" + format_double(y) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_double(sc.x0 - 8) + "\" y=\"" + format_double(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1e" +
               std::to_string(d) + "</text>\n";
    }
    for (double m = mlo; m <= mhi; m += std::max(1.0, std::floor((mhi - mlo) / 8))) {
        const double x = sc.fx(m, mlo, mhi);
        svg += "<line x1=\"" + format_double(x) + "\" y1=\"" + format_double(sc.y1) +
               "\" x2=\"" + format_double(x) + "\" y2=\"" + format_double(sc.y1 + 4) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(sc.y1 + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
               std::to_string(static_cast<int>(m)) + "</text>\n";
    }
    svg += "<text x=\"" + format_double((sc.x0 + sc.x1) / 2) + "\" y=\"" +
           format_double(H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">mode</text>\n";

    const char* mean_colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b"};
    for (std::size_t ci = 0; ci < report.curves.size(); ++ci) {
        const auto& c = report.curves[ci];
        const char* color = mean_colors[ci % 4];

        // +-1 std band
        std::string band = "<path fill=\"#f5b8c8\" fill-opacity=\"0.45\" stroke=\"none\" d=\"";
        bool first = true;
        for (const auto& r : c.rows) {
            const double y = sc.fy(std::max(r.empirical_mean + r.empirical_std, 1e-300));
            band += (first ? "M" : "L");
            band += format_double(std::round(sc.fx(r.mode, mlo, mhi) * 100) / 100) + " " +
                    format_double(std::round(y * 100) / 100);
            first = false;
        }
        for (auto it = c.rows.rbegin(); it != c.rows.rend(); ++it) {
            const double y =
                sc.fy(std::max(it->empirical_mean - it->empirical_std, 1e-300));
            band += "L" + format_double(std::round(sc.fx(it->mode, mlo, mhi) * 100) / 100) +
                    " " + format_double(std::round(y * 100) / 100);
        }
        band += "Z\"/>\n";
        svg += band;

        // per-replica dots
        for (const auto& rep : c.replica_curves) {
            for (const auto& r : c.rows) {
                if (r.mode < 0 || r.mode >= static_cast<int>(rep.size())) continue;
                const double v = rep[r.mode];
                if (!(v > 0.0)) continue;
                svg += "<circle cx=\"" +
                       format_double(std::round(sc.fx(r.mode, mlo, mhi) * 100) / 100) +
                       "\" cy=\"" + format_double(std::round(sc.fy(v) * 100) / 100) +
                       "\" r=\"1\" fill=\"#9ab\" fill-opacity=\"0.35\"/>\n";
            }
        }

        std::vector<std::pair<double, double>> mean_pts, theory_pts;
        for (const auto& r : c.rows) {
            if (r.empirical_mean > 0.0)
                mean_pts.push_back({sc.fx(r.mode, mlo, mhi), sc.fy(r.empirical_mean)});
            if (r.theory > 0.0)
                theory_pts.push_back({sc.fx(r.mode, mlo, mhi), sc.fy(r.theory)});
        }
        polyline(svg, mean_pts, (std::string("stroke:") + color + ";stroke-width:1.8").c_str());
        polyline(svg, theory_pts, "stroke:#d62728;stroke-width:1.4;stroke-dasharray:5 3");

        svg += "<text x=\"" + format_double(sc.x1 - 6) + "\" y=\"" +
               format_double(sc.y0 + 14 + 14 * ci) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
               color + "\">" + c.label + (c.passed ? " [pass]" : " [fail]") + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_file: cannot open " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write_file: write failed for " + path);
}

}  // namespace fnolab
