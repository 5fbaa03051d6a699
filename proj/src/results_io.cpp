#include "rydmimo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace rydmimo {

namespace {

std::string format(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s)
{
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

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace

void write_csv(const ResultTable& table, std::ostream& out)
{
    out << "label,sweep_param,sweep_value,mean_se_bps_hz,stderr,trials,seed\n";
    for (const auto& r : table.rows) {
        out << csv_field(r.label) << ',' << table.sweep_param << ',' << format("%.12g", r.sweep_value) << ','
            << format("%.12e", r.mean) << ',' << format("%.12e", r.std_error) << ',' << r.trials << ','
            << table.seed << '\n';
    }
}

void write_svg(const ResultTable& table, std::ostream& out, const std::string& title)
{
    constexpr double width = 720, height = 440;
    constexpr double left = 70, right = 200, top = 40, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::vector<std::string> labels;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& r : table.rows) {
        if (!series.count(r.label))
            labels.push_back(r.label);
        series[r.label].emplace_back(r.sweep_value, r.mean);
        xmin = std::min(xmin, r.sweep_value);
        xmax = std::max(xmax, r.sweep_value);
        ymin = std::min(ymin, r.mean);
        ymax = std::max(ymax, r.mean);
    }
    if (table.rows.empty())
        xmin = ymin = 0, xmax = ymax = 1;
    if (xmax == xmin)
        xmax = xmin + 1;
    ymin = std::min(ymin, 0.0);
    if (ymax == ymin)
        ymax = ymin + 1;

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };
    static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#17becf", "#e377c2", "#8c564b", "#7f7f7f", "#bcbd22"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << format("%.1f", px(xv)) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << format("%.4g", xv) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << format("%.1f", py(yv) + 4)
            << "\" text-anchor=\"end\">" << format("%.4g", yv) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
        << xml_escape(table.sweep_param) << "</text>\n";
    out << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
        << ")\" text-anchor=\"middle\">" << (table.sweep_param == "iteration" ? "residual" : "bits/s/Hz")
        << "</text>\n";

    for (std::size_t i = 0; i < labels.size(); ++i) {
        const char* color = palette[i % std::size(palette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[labels[i]])
            out << format("%.2f", px(x)) << ',' << format("%.2f", py(y)) << ' ';
        out << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(i);
        out << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + plot_w + 32
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << ly << "\">" << xml_escape(labels[i])
            << "</text>\n";
    }
    out << "</svg>\n";
}

void emit_results(const ResultTable& table, const ExperimentSpec& spec, const std::filesystem::path& output_dir)
{
    if (table.rows.empty())
        throw std::invalid_argument("emit_results: empty result table");
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + output_dir.string() + "': " + ec.message());

    std::ostringstream csv, svg;
    write_csv(table, csv);
    write_svg(table, svg, spec.name);
    write_file(output_dir / "results.csv", csv.str());
    write_file(output_dir / "results.svg", svg.str());
    write_file(output_dir / "manifest.json", spec_to_json(spec).dump(2) + "\n");
}

} // namespace rydmimo
