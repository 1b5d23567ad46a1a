#include "fowlerlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fowlerlab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

} // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string file_header(const ProblemParams& pp, const KProfile& profile,
                        std::uint64_t config_hash, const std::string& regime) {
    std::ostringstream out;
    out << "# fowlerlab " << kToolVersion << "\n";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "# config_hash=" << hash << "\n";
    out << "# params: n=" << pp.n << " p=" << fmt(pp.p) << " q=" << fmt(pp.q)
        << " alpha=" << fmt(pp.alpha) << " beta=" << fmt(pp.beta)
        << " ell_star=" << fmt(pp.ell_star) << "\n";
    out << "# profile: " << profile.describe() << "\n";
    out << "# regime: " << regime << "\n";
    return out.str();
}

std::string outcome_name(ShotOutcome o) {
    switch (o) {
    case ShotOutcome::Crossing: return "crossing";
    case ShotOutcome::PositiveUpToBudget: return "positive_up_to_budget";
    case ShotOutcome::Diverged: return "diverged";
    }
    return "?";
}

std::string trend_name(Trend t) {
    switch (t) {
    case Trend::Decaying: return "decaying";
    case Trend::NearHomoclinic: return "near_homoclinic";
    case Trend::Undetermined: return "undetermined";
    }
    return "?";
}

void write_trajectory_csv(const std::string& path, const std::string& header,
                          const ProblemParams& pp, const KProfile& profile,
                          const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << header << "t,x,y,H,K,dKdt\n";
    for (const auto& s : traj.samples()) {
        KProfile::Eval ke = profile.eval_t(s.t);
        out << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << ','
            << fmt(energy(pp, ke.value, s.x, s.y)) << ',' << fmt(ke.value) << ','
            << fmt(ke.deriv) << '\n';
    }
}

void write_shots_csv(const std::string& path, const std::string& header,
                     const std::vector<ShotResult>& shots) {
    std::ofstream out = open_out(path);
    out << header << "d,outcome,T,R,y_at_zero,t_end\n";
    for (const auto& s : shots) {
        out << fmt(s.d) << ',' << outcome_name(s.outcome) << ',';
        if (s.outcome == ShotOutcome::Crossing)
            out << fmt(s.T) << ',' << fmt(s.R) << ',' << fmt(s.y_at_zero);
        else
            out << ",,";
        out << ',' << fmt(s.t_end) << '\n';
    }
}

void write_diagram_csv(const std::string& path, const std::string& header,
                       const BifurcationDiagram& diagram) {
    std::ofstream out = open_out(path);
    out << header << "d,T,R,outcome\n";
    for (const auto& pt : diagram.points) {
        out << fmt(pt.d) << ',';
        if (pt.failed) {
            out << ",,failed\n";
            continue;
        }
        if (pt.shot.outcome == ShotOutcome::Crossing)
            out << fmt(pt.shot.T) << ',' << fmt(pt.shot.R) << ',';
        else
            out << ",,";
        out << outcome_name(pt.shot.outcome) << '\n';
    }
}

namespace {

struct Mapper {
    double x0, x1, y0, y1; // data ranges (log10)
    double px0 = 80, px1 = 680, py0 = 60, py1 = 440;

    double mx(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double my(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

} // namespace

void write_diagram_svg(const std::string& path, const BifurcationDiagram& diagram,
                       const std::string& title) {
    std::vector<std::pair<double, double>> pts; // (log10 d, log10 R)
    for (const auto& pt : diagram.points)
        if (!pt.failed && pt.shot.outcome == ShotOutcome::Crossing)
            pts.push_back({std::log10(pt.d), std::log10(pt.shot.R)});

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"500\" "
           "viewBox=\"0 0 720 500\">\n";
    out << "<rect width=\"720\" height=\"500\" fill=\"white\"/>\n";
    out << "<text x=\"360\" y=\"30\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" << title << "</text>\n";

    if (pts.empty()) {
        out << "<text x=\"360\" y=\"250\" text-anchor=\"middle\" font-size=\"14\" "
               "font-family=\"sans-serif\">no crossing solutions</text>\n</svg>\n";
        return;
    }

    Mapper m{pts.front().first, pts.front().first, pts.front().second,
             pts.front().second};
    for (const auto& [x, y] : pts) {
        m.x0 = std::min(m.x0, x); m.x1 = std::max(m.x1, x);
        m.y0 = std::min(m.y0, y); m.y1 = std::max(m.y1, y);
    }
    if (m.x1 - m.x0 < 1e-9) { m.x0 -= 0.5; m.x1 += 0.5; }
    if (m.y1 - m.y0 < 1e-9) { m.y0 -= 0.5; m.y1 += 0.5; }
    // pad the y range a little
    double pad = 0.05 * (m.y1 - m.y0);
    m.y0 -= pad; m.y1 += pad;

    // axes
    out << "<rect x=\"" << m.px0 << "\" y=\"" << m.py0 << "\" width=\""
        << m.px1 - m.px0 << "\" height=\"" << m.py1 - m.py0
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    // decade ticks
    for (int e = static_cast<int>(std::ceil(m.x0)); e <= std::floor(m.x1); ++e) {
        double X = m.mx(e);
        out << "<line x1=\"" << X << "\" y1=\"" << m.py1 << "\" x2=\"" << X
            << "\" y2=\"" << m.py1 + 6 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << X << "\" y=\"" << m.py1 + 22
            << "\" text-anchor=\"middle\" font-size=\"12\" "
               "font-family=\"sans-serif\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(m.y0)); e <= std::floor(m.y1); ++e) {
        double Y = m.my(e);
        out << "<line x1=\"" << m.px0 - 6 << "\" y1=\"" << Y << "\" x2=\"" << m.px0
            << "\" y2=\"" << Y << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << m.px0 - 10 << "\" y=\"" << Y + 4
            << "\" text-anchor=\"end\" font-size=\"12\" "
               "font-family=\"sans-serif\">1e" << e << "</text>\n";
    }
    out << "<text x=\"380\" y=\"480\" text-anchor=\"middle\" font-size=\"13\" "
           "font-family=\"sans-serif\">d (log)</text>\n";
    out << "<text x=\"20\" y=\"250\" text-anchor=\"middle\" font-size=\"13\" "
           "font-family=\"sans-serif\" transform=\"rotate(-90 20 250)\">R(d) "
           "(log)</text>\n";

    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) out << m.mx(x) << ',' << m.my(y) << ' ';
    out << "\"/>\n";

    if (diagram.fold && diagram.fold->interior) {
        double X = m.mx(std::log10(diagram.fold->d0));
        double Y = m.my(std::log10(diagram.fold->R0));
        out << "<circle cx=\"" << X << "\" cy=\"" << Y
            << "\" r=\"5\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << X + 10 << "\" y=\"" << Y - 8
            << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"#d62728\">R0="
            << diagram.fold->R0 << "</text>\n";
    }

    std::string regime = diagram.regime ? regime_name(*diagram.regime) : "n/a";
    out << "<text x=\"" << m.px1 - 8 << "\" y=\"" << m.py0 + 18
        << "\" text-anchor=\"end\" font-size=\"13\" font-family=\"sans-serif\">regime: "
        << regime << " (ell";
    if (diagram.ell) out << "=" << *diagram.ell;
    out << ", ell*=" << diagram.ell_star << ")</text>\n";
    out << "</svg>\n";
}

} // namespace fowlerlab
