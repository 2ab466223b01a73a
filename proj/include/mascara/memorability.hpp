#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mascara/markov.hpp"

namespace mascara {

// Weights of the linear CER model for the L1 sum, the L2 sum and sigma_chr.
struct CerCoefficients {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;

    friend bool operator==(const CerCoefficients&, const CerCoefficients&) = default;
};

// Coefficients fitted on the Kristensson-Vertanen annotated phrase set.
inline constexpr CerCoefficients kPublishedCerCoefficients{-3.42e-2, -6.46e-3, 1.19e-4};

struct CerFeatures {
    double l1_sum = 0.0;
    double l2_sum = 0.0;
    double sigma_chr = 0.0;

    CerFeatures operator+(const CerFeatures& o) const {
        return {l1_sum + o.l1_sum, l2_sum + o.l2_sum, sigma_chr + o.sigma_chr};
    }
};

struct CerEstimate {
    double value = 0.0;
    CerFeatures features;
};

// Population standard deviation of the word lengths.
double sigma_chr(std::span<const std::string> phrase);

// Half-count floor, log10(0.5 / total tokens), used for unseen unigrams and
// bigrams.
double default_oov_floor(const MarkovModel& model);

CerFeatures phrase_features(const MarkovModel& model, std::span<const std::string> phrase, double oov_floor);
inline CerFeatures phrase_features(const MarkovModel& model, std::span<const std::string> phrase) {
    return phrase_features(model, phrase, default_oov_floor(model));
}

CerEstimate estimate_cer(const CerCoefficients& coeffs, const CerFeatures& features);

struct FitSample {
    CerFeatures features;
    double observed = 0.0;
};

struct CerFit {
    CerCoefficients coefficients;
    double r_squared = 0.0;
    // Pearson r of each feature against the observed CER; empty when a column
    // has zero variance.
    std::array<std::optional<double>, 3> pearson;
    std::size_t samples = 0;
};

// Least squares without intercept. Needs at least four samples and three
// linearly independent feature columns.
CerFit fit_cer_coefficients(std::span<const FitSample> samples);

struct AnnotatedPhrase {
    std::vector<std::string> words;
    double cer = 0.0;
};

CerFit fit_cer_coefficients(std::span<const AnnotatedPhrase> dataset, const MarkovModel& model);

// phrase<TAB>cer per line, '#' lines and blank lines skipped. CER is a
// decimal fraction.
std::vector<AnnotatedPhrase> load_cer_dataset(std::istream& in);
std::vector<AnnotatedPhrase> load_cer_dataset_file(const std::string& path);

double pearson_r(std::span<const double> x, std::span<const double> y);

}  // namespace mascara
