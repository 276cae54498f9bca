#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "shapesense/dataset.hpp"
#include "shapesense/errors.hpp"

namespace shapesense {

namespace {

constexpr std::size_t kFieldCount = kChannels + 2;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc{} && ptr == end;
}

bool skippable(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#' || t.starts_with("a00");
}

}  // namespace

std::string format_real(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("cannot format number");
    return std::string(buf, ptr);
}

std::string dataset_csv_header() {
    std::string h;
    for (int i = 0; i < kGridSize; ++i)
        for (int j = 0; j < kGridSize; ++j) {
            h += 'a';
            h += static_cast<char>('0' + i);
            h += static_cast<char>('0' + j);
            h += ',';
        }
    return h + "kappa,phi";
}

Sample parse_frame_line(std::string_view line, double length) {
    const auto fields = split_fields(trim(line));
    if (fields.size() != kFieldCount)
        throw ParseError(0, "field-count: expected " + std::to_string(kFieldCount) + ", got " +
                                std::to_string(fields.size()));
    Sample s;
    for (int c = 0; c < kChannels; ++c) {
        int count = 0;
        if (!parse_number(fields[c], count))
            throw ParseError(c + 1, "non-numeric count '" + std::string(fields[c]) + "'");
        if (count < 0 || count > kAdcMax)
            throw ParseError(c + 1, "count " + std::to_string(count) + " outside [0, 1023]");
        s.frame.counts[c] = count;
    }
    double kappa = 0.0, phi = 0.0;
    if (!parse_number(fields[kChannels], kappa) || !std::isfinite(kappa))
        throw ParseError(kChannels + 1, "non-numeric kappa");
    if (!parse_number(fields[kChannels + 1], phi) || !std::isfinite(phi))
        throw ParseError(kChannels + 2, "non-numeric phi");
    if (kappa < 0.0 || kappa * length > std::numbers::pi / 2.0 + 1e-12)
        throw ParseError(kChannels + 1, "kappa outside workspace");
    if (phi <= -std::numbers::pi || phi > std::numbers::pi)
        throw ParseError(kChannels + 2, "phi outside (-pi, pi]");
    s.label = CurvatureState::make(kappa, phi, length);
    return s;
}

std::string format_frame_line(const Sample& sample) {
    std::string line;
    for (int c : sample.frame.counts) {
        line += std::to_string(c);
        line += ',';
    }
    line += format_real(sample.label.kappa);
    line += ',';
    line += format_real(sample.label.phi);
    return line;
}

void write_dataset_csv(std::ostream& out, const std::vector<Sample>& samples) {
    out << dataset_csv_header() << '\n';
    for (const auto& s : samples) out << format_frame_line(s) << '\n';
}

CsvReadResult read_dataset_csv(std::istream& in, bool strict, double length) {
    CsvReadResult result;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (skippable(line)) continue;
        try {
            result.samples.push_back(parse_frame_line(line, length));
        } catch (const ParseError& e) {
            if (strict) throw ParseError(e.column(), "line " + std::to_string(number) + ": " + e.reason());
            result.errors.push_back({number, e.what()});
        }
    }
    return result;
}

std::string norm_stats_to_json(const NormStats& norm) {
    nlohmann::json j;
    j["mu"] = norm.mu;
    j["sigma"] = norm.sigma;
    return j.dump();
}

NormStats norm_stats_from_json(std::string_view text) {
    NormStats norm;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& mu = j.at("mu");
        const auto& sigma = j.at("sigma");
        if (mu.size() != kChannels || sigma.size() != kChannels)
            throw SchemaError("normalization statistics need 16 mu and 16 sigma values");
        for (int c = 0; c < kChannels; ++c) {
            norm.mu[c] = mu.at(c).get<double>();
            norm.sigma[c] = sigma.at(c).get<double>();
            if (!(norm.sigma[c] >= kSigmaFloor)) throw SchemaError("sigma below floor");
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed normalization statistics: ") + e.what());
    }
    return norm;
}

}  // namespace shapesense
