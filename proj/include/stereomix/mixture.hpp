#pragma once

namespace smx {

// Decode-time clamps keeping likelihood and gradients finite.
inline constexpr double kBMin = 1e-4;
inline constexpr double kBMax = 1.0;
inline constexpr double kPiClamp = 1e-4; // pi in [kPiClamp, 1 - kPiClamp]

// Bimodal Laplacian mixture over normalized disparity:
//   p(d) = pi/(2 b1) exp(-|d-mu1|/b1) + (1-pi)/(2 b2) exp(-|d-mu2|/b2)
struct MixtureParams {
    double pi, mu1, b1, mu2, b2;
};

struct UnimodalParams {
    double mu, b;
};

// Partials of the NLL w.r.t. the five decoded parameters.
struct Grad5 {
    double d_pi, d_mu1, d_b1, d_mu2, d_b2;
};

struct Grad2 {
    double d_mu, d_b;
};

double pdf(const MixtureParams& p, double d);

// Stable shifted-max form; agrees with log(pdf) wherever pdf does not underflow.
double log_pdf(const MixtureParams& p, double d);

double nll(const MixtureParams& p, double d);

// Analytic gradient of nll. At d == mu the |.| kink takes subgradient 0.
Grad5 nll_grad(const MixtureParams& p, double d);

// Mode with the highest density value; mu1 wins ties.
double select_mode(const MixtureParams& p);

// Differential entropy -int p log p, composite Simpson quadrature over
// [min(mu) - 20 max(b), max(mu) + 20 max(b)], >= 2048 base intervals split at
// the mode kinks, with local refinement so narrow modes stay resolved.
double entropy(const MixtureParams& p);

// Same quadrature applied to p itself (normalization check; ~1 up to truncation).
double pdf_mass(const MixtureParams& p);

// Single-Laplace baseline: nll = log(2b) + |d-mu|/b.
double unimodal_nll(const UnimodalParams& p, double d);
Grad2 unimodal_grad(const UnimodalParams& p, double d);
double unimodal_entropy(const UnimodalParams& p); // closed form 1 + log(2b)

// Point-estimate baseline.
double l1_loss(double pred, double d);
double l1_grad(double pred, double d); // d|pred-d|/dpred, 0 at the kink

} // namespace smx
