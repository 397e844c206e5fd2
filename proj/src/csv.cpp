#include "qform/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace qform::csv {

std::string fmt(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

void write_formation_trace(std::ostream& out, const formation::Run& run, const analysis::SafetySpec& spec) {
    const std::size_t n = run.y0.size();
    out << "step,i,j";
    for (std::size_t k = 1; k <= n; ++k) out << ",r_" << k << ",theta_" << k;
    out << ",safe\n";
    run.replay([&](std::int64_t t, const FormationState& y) {
        if (t == 0) {
            out << "0,-1,-1";
        } else {
            const formation::TraceEvent& e = run.events[static_cast<std::size_t>(t - 1)];
            out << t << ',' << (e.i + 1) << ',' << (e.j + 1);
        }
        for (const PolarVec& p : y) out << ',' << fmt(p.r) << ',' << fmt(p.theta);
        out << ',' << (analysis::is_safe(y, spec) ? 1 : 0) << '\n';
    });
}

void write_samples(std::ostream& out, const std::vector<SampleRecord>& samples) {
    out << "true_r,true_theta,est_r,est_theta,env\n";
    for (const SampleRecord& s : samples) {
        out << fmt(s.true_pos.r) << ',' << fmt(s.true_pos.theta) << ',' << fmt(s.est_pos.r) << ','
            << fmt(s.est_pos.theta) << ',' << s.env << '\n';
    }
}

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

SampleLoad read_samples(std::istream& in) {
    SampleLoad out;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("samples: empty file");
    {
        const auto header = split_fields(line);
        if (header.size() < 4 || header[0] != "true_r" || header[1] != "true_theta" || header[2] != "est_r" ||
            header[3] != "est_theta")
            throw std::runtime_error("samples: expected header true_r,true_theta,est_r,est_theta[,env]");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        double tr, tt, er, et;
        if (fields.size() < 4 || !parse_double(fields[0], tr) || !parse_double(fields[1], tt) ||
            !parse_double(fields[2], er) || !parse_double(fields[3], et)) {
            ++out.skipped;
            continue;
        }
        if (!(tr > 0.0) || !std::isfinite(tr) || !std::isfinite(tt)) {
            ++out.skipped;  // the ground truth must be a valid polar vector
            continue;
        }
        SampleRecord rec;
        rec.true_pos = {tr, wrap_angle(tt)};
        // invalid estimates are kept: they count as contract violations downstream
        rec.est_pos.r = er;
        rec.est_pos.theta = std::isfinite(et) ? wrap_angle(et) : et;
        rec.env = fields.size() > 4 ? fields[4] : std::string{};
        out.samples.push_back(std::move(rec));
    }
    return out;
}

}  // namespace qform::csv
