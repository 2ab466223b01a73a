#include "mascara/memorability.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "mascara/error.hpp"

namespace mascara {

double sigma_chr(std::span<const std::string> phrase) {
    if (phrase.empty()) throw DomainError("sigma_chr of an empty phrase");
    double sum = 0.0;
    for (const auto& w : phrase) sum += static_cast<double>(w.size());
    const double mean = sum / static_cast<double>(phrase.size());
    double var = 0.0;
    for (const auto& w : phrase) {
        const double d = static_cast<double>(w.size()) - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(phrase.size()));
}

double default_oov_floor(const MarkovModel& model) {
    return std::log10(0.5 / static_cast<double>(model.total_words()));
}

CerFeatures phrase_features(const MarkovModel& model, std::span<const std::string> phrase, double oov_floor) {
    if (phrase.empty()) throw DomainError("phrase features of an empty phrase");
    CerFeatures f;
    std::optional<WordId> prev;
    for (std::size_t i = 0; i < phrase.size(); ++i) {
        auto id = model.find(phrase[i]);
        if (id && model.is_sentinel(*id)) id.reset();
        f.l1_sum += id ? model.l1(*id) : oov_floor;
        if (i > 0) {
            if (prev && id && model.bigram_count(*prev, *id) > 0) {
                f.l2_sum += model.l2(*prev, *id);
            } else {
                f.l2_sum += oov_floor;
            }
        }
        prev = id;
    }
    f.sigma_chr = sigma_chr(phrase);
    return f;
}

CerEstimate estimate_cer(const CerCoefficients& c, const CerFeatures& f) {
    return {c.alpha1 * f.l1_sum + c.alpha2 * f.l2_sum + c.alpha3 * f.sigma_chr, f};
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

CerFit fit_cer_coefficients(std::span<const FitSample> samples) {
    if (samples.size() < 4) {
        throw FitError("need at least 4 annotated phrases, got " + std::to_string(samples.size()));
    }
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        x(i, 0) = s.features.l1_sum;
        x(i, 1) = s.features.l2_sum;
        x(i, 2) = s.features.sigma_chr;
        y(i) = s.observed;
    }
    if (!x.allFinite() || !y.allFinite()) throw FitError("non-finite feature or target value");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 3) throw FitError("feature columns are collinear; normal equations are singular");
    const Eigen::Vector3d beta = qr.solve(y);

    CerFit fit;
    fit.samples = samples.size();
    fit.coefficients = {beta(0), beta(1), beta(2)};
    const Eigen::VectorXd residual = y - x * beta;
    const double ss_res = residual.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    if (ss_tot > 0.0) {
        fit.r_squared = 1.0 - ss_res / ss_tot;
    } else {
        fit.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
    }

    std::vector<double> target(y.data(), y.data() + n);
    for (int j = 0; j < 3; ++j) {
        std::vector<double> column(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = x(i, j);
        const double r = pearson_r(column, target);
        if (std::isfinite(r)) fit.pearson[static_cast<std::size_t>(j)] = r;
    }
    return fit;
}

CerFit fit_cer_coefficients(std::span<const AnnotatedPhrase> dataset, const MarkovModel& model) {
    const double floor = default_oov_floor(model);
    std::vector<FitSample> samples;
    samples.reserve(dataset.size());
    for (const auto& p : dataset) samples.push_back({phrase_features(model, p.words, floor), p.cer});
    return fit_cer_coefficients(samples);
}

std::vector<AnnotatedPhrase> load_cer_dataset(std::istream& in) {
    std::vector<AnnotatedPhrase> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw LoadError("expected phrase<TAB>cer", line_no);
        std::string_view field(line.data() + tab + 1, line.size() - tab - 1);
        double cer = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), cer);
        if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(cer)) {
            throw LoadError("non-numeric CER value '" + std::string(field) + "'", line_no);
        }
        auto words = normalize_phrase(std::string_view(line.data(), tab));
        if (words.empty()) throw LoadError("phrase has no words", line_no);
        out.push_back({std::move(words), cer});
    }
    if (in.bad()) throw LoadError("read failure", line_no);
    return out;
}

std::vector<AnnotatedPhrase> load_cer_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path + "'");
    return load_cer_dataset(in);
}

}  // namespace mascara
