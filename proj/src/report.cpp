#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "text_io.hpp"
#include "twinbridge/cli.hpp"
#include "twinbridge/errors.hpp"

namespace twinbridge {

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ParseError(1, "missing column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = io::trim(line);
        if (trimmed.empty()) continue;
        std::vector<std::string> cells;
        for (auto c : io::split(trimmed, ',')) cells.emplace_back(io::trim(c));
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else if (cells.size() != t.header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(t.header.size()) + " fields, got " +
                                          std::to_string(cells.size()));
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw ParseError(1, path.filename().string() + " is empty");
    return t;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 500;
constexpr double kLeft = 80, kRight = 160, kTop = 50, kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return io::format_fixed(v, 2); }

/// Tick label with as few digits as the spacing needs.
std::string tick_label(double v, double step) {
    const int digits = step >= 1.0 ? 0 : std::min(6, static_cast<int>(std::ceil(-std::log10(step))));
    return io::format_fixed(v, digits);
}

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - pad, hi + pad};
    }
    return {lo, hi};
}

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">" << esc(title)
       << "</text>\n";
}

void axes(std::ostringstream& os, Range xr, Range yr, const std::string& xl, const std::string& yl,
          bool x_ticks = true, bool y_ticks = true) {
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        if (x_ticks) {
            const double v = xr.lo + (xr.hi - xr.lo) * i / 5.0;
            const double px = x0 + (x1 - x0) * i / 5.0;
            os << "<line x1=\"" << num(px) << "\" y1=\"" << y0 << "\" x2=\"" << num(px) << "\" y2=\""
               << y0 + 5 << "\" stroke=\"black\"/>\n"
               << "<text x=\"" << num(px) << "\" y=\"" << y0 + 20 << "\" text-anchor=\"middle\" font-size=\"12\">"
               << tick_label(v, (xr.hi - xr.lo) / 5.0) << "</text>\n";
        }
        if (y_ticks) {
            const double v = yr.lo + (yr.hi - yr.lo) * i / 5.0;
            const double py = y0 - (y0 - y1) * i / 5.0;
            os << "<line x1=\"" << x0 - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << x0 << "\" y2=\"" << num(py)
               << "\" stroke=\"black\"/>\n"
               << "<text x=\"" << x0 - 8 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\" font-size=\"12\">"
               << tick_label(v, (yr.hi - yr.lo) / 5.0) << "</text>\n";
        }
    }
    os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 15
       << "\" text-anchor=\"middle\" font-size=\"14\">" << esc(xl) << "</text>\n"
       << "<text x=\"20\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
       << (y0 + y1) / 2 << ")\">" << esc(yl) << "</text>\n";
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw DomainError("series x and y differ in length");
        for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
        for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    if (!std::isfinite(xmin)) xmin = xmax = ymin = ymax = 0.0;
    const Range xr = padded(xmin, xmax);
    const Range yr = padded(ymin, ymax);

    std::ostringstream os;
    header(os, title);
    axes(os, xr, yr, x_label, y_label);
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto py = [&](double y) { return y0 - (y - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto* colour = kPalette[i % std::size(kPalette)];
        os << "<polyline class=\"series\" data-name=\"" << esc(series[i].name) << "\" fill=\"none\" stroke=\""
           << colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t j = 0; j < series[i].x.size(); ++j) {
            os << (j ? " " : "") << num(px(series[i].x[j])) << ',' << num(py(series[i].y[j]));
        }
        os << "\"/>\n";
        const double ly = kTop + 20 + 22.0 * static_cast<double>(i);
        os << "<line x1=\"" << x1 + 15 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 40 << "\" y2=\"" << ly
           << "\" stroke=\"" << colour << "\" stroke-width=\"3\"/>\n"
           << "<text x=\"" << x1 + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"13\">" << esc(series[i].name)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_heatmap(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<HeatCell>& cells) {
    std::set<double> xs, ys;
    double vmin = INFINITY, vmax = -INFINITY;
    for (const auto& c : cells) {
        xs.insert(c.x);
        ys.insert(c.y);
        vmin = std::min(vmin, c.value);
        vmax = std::max(vmax, c.value);
    }
    if (cells.empty()) vmin = vmax = 0.0;
    const Range vr = padded(vmin, vmax);

    std::ostringstream os;
    header(os, title);
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    const std::vector<double> xv(xs.begin(), xs.end()), yv(ys.begin(), ys.end());
    const double cw = xv.empty() ? 0.0 : (x1 - x0) / static_cast<double>(xv.size());
    const double ch = yv.empty() ? 0.0 : (y0 - y1) / static_cast<double>(yv.size());
    // white (low) to dark blue (high)
    auto colour = [&](double v) {
        const double t = std::clamp((v - vr.lo) / (vr.hi - vr.lo), 0.0, 1.0);
        const int r = static_cast<int>(std::lround(255 - t * (255 - 8)));
        const int g = static_cast<int>(std::lround(255 - t * (255 - 48)));
        const int b = static_cast<int>(std::lround(255 - t * (255 - 107)));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };
    for (const auto& c : cells) {
        const auto ix = static_cast<double>(std::lower_bound(xv.begin(), xv.end(), c.x) - xv.begin());
        const auto iy = static_cast<double>(std::lower_bound(yv.begin(), yv.end(), c.y) - yv.begin());
        const double rx = x0 + ix * cw;
        const double ry = y0 - (iy + 1) * ch;
        os << "<rect class=\"cell\" x=\"" << num(rx) << "\" y=\"" << num(ry) << "\" width=\"" << num(cw)
           << "\" height=\"" << num(ch) << "\" fill=\"" << colour(c.value) << "\" stroke=\"#888\"/>\n"
           << "<text x=\"" << num(rx + cw / 2) << "\" y=\"" << num(ry + ch / 2 + 4)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << io::format_fixed(c.value, 1) << "</text>\n";
    }
    for (std::size_t i = 0; i < xv.size(); ++i) {
        os << "<text x=\"" << num(x0 + (static_cast<double>(i) + 0.5) * cw) << "\" y=\"" << y0 + 20
           << "\" text-anchor=\"middle\" font-size=\"12\">" << io::format_double(xv[i]) << "</text>\n";
    }
    for (std::size_t i = 0; i < yv.size(); ++i) {
        os << "<text x=\"" << x0 - 8 << "\" y=\"" << num(y0 - (static_cast<double>(i) + 0.5) * ch + 4)
           << "\" text-anchor=\"end\" font-size=\"12\">" << io::format_double(yv[i]) << "</text>\n";
    }
    axes(os, {0, 1}, {0, 1}, x_label, y_label, false, false);
    // colour bar
    for (int i = 0; i < 10; ++i) {
        const double v = vr.lo + (vr.hi - vr.lo) * (i + 0.5) / 10.0;
        os << "<rect x=\"" << x1 + 30 << "\" y=\"" << num(y0 - (i + 1) * (y0 - y1) / 10.0) << "\" width=\"20\" height=\""
           << num((y0 - y1) / 10.0) << "\" fill=\"" << colour(v) << "\"/>\n";
    }
    os << "<text x=\"" << x1 + 56 << "\" y=\"" << y1 + 10 << "\" font-size=\"12\">" << io::format_fixed(vr.hi, 1)
       << "</text>\n<text x=\"" << x1 + 56 << "\" y=\"" << y0 << "\" font-size=\"12\">" << io::format_fixed(vr.lo, 1)
       << "</text>\n</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// report command

namespace {

double cell_number(const CsvTable& t, std::size_t row, std::size_t col, const char* file) {
    const auto v = io::parse_double(t.rows[row][col]);
    if (!v) {
        throw ParseError(row + 2, std::string(file) + ": non-numeric " + t.header[col] + " '" + t.rows[row][col] + "'");
    }
    return *v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text)) throw Error("cannot write " + path.string());
}

}  // namespace

int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
    CsvTable summary, iterations, per_state;
    try {
        for (const char* name : {"summary.csv", "iterations.csv", "per_state.csv"}) {
            if (!std::filesystem::exists(dir / name)) throw Error("missing " + (dir / name).string());
        }
        summary = read_csv(dir / "summary.csv");
        iterations = read_csv(dir / "iterations.csv");
        per_state = read_csv(dir / "per_state.csv");
        if (iterations.rows.empty()) throw Error("iterations.csv has no rows; nothing to plot");
        if (summary.rows.empty()) throw Error("summary.csv has no rows");
    } catch (const std::exception& e) {
        err << "report: " << e.what() << '\n';
        return 2;
    }

    try {
        std::vector<std::string> methods;
        std::map<std::string, Series> disc, eff, cum;
        const auto sm = summary.column("method"), sq = summary.column("queried"),
                   sk = summary.column("global_kl"), se = summary.column("cost_efficiency");
        for (std::size_t i = 0; i < summary.rows.size(); ++i) {
            const auto& m = summary.rows[i][sm];
            if (!disc.contains(m)) {
                methods.push_back(m);
                disc[m].name = eff[m].name = cum[m].name = m;
            }
            const double q = cell_number(summary, i, sq, "summary.csv");
            disc[m].x.push_back(q);
            disc[m].y.push_back(cell_number(summary, i, sk, "summary.csv"));
            if (summary.rows[i][se] != "n/a") {
                eff[m].x.push_back(q);
                eff[m].y.push_back(cell_number(summary, i, se, "summary.csv"));
            }
        }
        const auto im = iterations.column("method"), ii = iterations.column("iter"),
                   ic = iterations.column("cumulative_cost");
        for (std::size_t i = 0; i < iterations.rows.size(); ++i) {
            const auto& m = iterations.rows[i][im];
            if (!cum.contains(m)) throw ParseError(i + 2, "iterations.csv: method '" + m + "' not in summary.csv");
            cum[m].x.push_back(cell_number(iterations, i, ii, "iterations.csv"));
            cum[m].y.push_back(cell_number(iterations, i, ic, "iterations.csv"));
        }
        auto ordered = [&](std::map<std::string, Series>& by) {
            std::vector<Series> v;
            for (const auto& m : methods) v.push_back(by[m]);
            return v;
        };

        // heatmap of mean per-state reduction over (U, D) for the first BNN method present
        std::string heat_method = methods.front();
        for (const char* pref : {"L2B", "L2B-Lite"}) {
            if (std::find(methods.begin(), methods.end(), pref) != methods.end()) {
                heat_method = pref;
                break;
            }
        }
        const auto pm = per_state.column("method"), pu = per_state.column("U"), pd = per_state.column("D"),
                   pr = per_state.column("reduction_pct");
        std::map<std::pair<double, double>, std::pair<double, int>> acc;
        for (std::size_t i = 0; i < per_state.rows.size(); ++i) {
            if (per_state.rows[i][pm] != heat_method || per_state.rows[i][pr] == "n/a") continue;
            auto& a = acc[{cell_number(per_state, i, pu, "per_state.csv"), cell_number(per_state, i, pd, "per_state.csv")}];
            a.first += cell_number(per_state, i, pr, "per_state.csv");
            ++a.second;
        }
        std::vector<HeatCell> cells;
        for (const auto& [k, v] : acc) cells.push_back({k.first, k.second, v.first / v.second});

        write_text(dir / "discrepancy.svg",
                   svg_line_chart("Sim-to-real discrepancy", "queried states", "average KL (nats)", ordered(disc)));
        write_text(dir / "cumulative_cost.svg",
                   svg_line_chart("Cumulative querying cost", "queried states", "cumulative cost", ordered(cum)));
        write_text(dir / "cost_efficiency.svg",
                   svg_line_chart("Cost efficiency", "queried states", "reduced KL per unit cost", ordered(eff)));
        write_text(dir / "per_state_heatmap.svg",
                   svg_heatmap("Per-state reduction (%) for " + heat_method, "uplink PRBs (U)",
                               "downlink PRBs (D)", cells));
        out << "wrote 4 charts to " << dir.string() << '\n';
        return 0;
    } catch (const ParseError& e) {
        err << "report: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "report: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace twinbridge
