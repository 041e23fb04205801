#include "dualtrack/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualtrack {

namespace {

void check_same_shape(const Heatmap& p, const LabelMap& y, const char* who) {
    if (p.height != y.height || p.width != y.width || p.anchors != y.anchors)
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
    if (p.values.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
}

void check_open_unit(double v, const char* who) {
    if (!(v > 0.0 && v < 1.0))
        throw std::domain_error(std::string(who) + ": prediction outside (0,1)");
}

}  // namespace

LossResult focal_loss(const Heatmap& pred, const LabelMap& labels, double gamma) {
    check_same_shape(pred, labels, "focal_loss");
    if (gamma < 0.0) throw std::invalid_argument("focal_loss: negative gamma");
    const size_t n = pred.values.size();
    size_t npos = 0, nneg = 0;
    for (size_t k = 0; k < n; ++k) {
        const double y = labels.values[k];
        if (y == 1.0)
            ++npos;
        else if (y == 0.0)
            ++nneg;
        else if (y != -1.0)
            throw std::invalid_argument("focal_loss: labels must be -1, 0 or 1");
    }
    LossResult out;
    out.grad.assign(n, 0.0);
    double pos_sum = 0.0, neg_sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double y = labels.values[k];
        if (y == -1.0) continue;
        const double p = pred.values[k];
        check_open_unit(p, "focal_loss");
        if (y == 1.0) {
            const double q = 1.0 - p;
            pos_sum += -std::pow(q, gamma) * std::log(p);
            out.grad[k] = gamma * std::pow(q, gamma - 1.0) * std::log(p) - std::pow(q, gamma) / p;
        } else {
            neg_sum += -std::pow(p, gamma) * std::log(1.0 - p);
            out.grad[k] =
                -gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p) + std::pow(p, gamma) / (1.0 - p);
        }
    }
    for (size_t k = 0; k < n; ++k) {
        const double y = labels.values[k];
        if (y == 1.0 && npos > 0)
            out.grad[k] /= double(npos);
        else if (y == 0.0 && nneg > 0)
            out.grad[k] /= double(nneg);
    }
    out.value = (npos > 0 ? pos_sum / double(npos) : 0.0) +
                (nneg > 0 ? neg_sum / double(nneg) : 0.0);
    return out;
}

LossResult fc_pr_loss(const Heatmap& pred, const LabelMap& labels, double alpha, double beta) {
    check_same_shape(pred, labels, "fc_pr_loss");
    if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("fc_pr_loss: negative exponent");
    const size_t n = pred.values.size();
    LossResult out;
    out.grad.assign(n, 0.0);
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double p = pred.values[k];
        const double y = labels.values[k];
        check_open_unit(p, "fc_pr_loss");
        if (!(y >= 0.0 && y <= 1.0))
            throw std::invalid_argument("fc_pr_loss: labels outside [0,1]");
        if (y == 1.0) {
            const double q = 1.0 - p;
            sum += -std::pow(q, alpha) * std::log(p);
            out.grad[k] =
                (alpha * std::pow(q, alpha - 1.0) * std::log(p) - std::pow(q, alpha) / p) / double(n);
        } else {
            const double w = std::pow(1.0 - y, beta);
            sum += -w * std::pow(p, alpha) * std::log(1.0 - p);
            out.grad[k] = w *
                          (-alpha * std::pow(p, alpha - 1.0) * std::log(1.0 - p) +
                           std::pow(p, alpha) / (1.0 - p)) /
                          double(n);
        }
    }
    out.value = sum / double(n);
    return out;
}

LossResult fc_rg_loss(const Heatmap& pred, const LabelMap& labels, double alpha, double beta) {
    check_same_shape(pred, labels, "fc_rg_loss");
    const int ia = static_cast<int>(alpha);
    if (ia <= 0 || ia % 2 != 0 || double(ia) != alpha)
        throw std::invalid_argument("fc_rg_loss: alpha must be a positive even integer");
    if (beta < 0.0) throw std::invalid_argument("fc_rg_loss: negative beta");
    const size_t n = pred.values.size();
    LossResult out;
    out.grad.assign(n, 0.0);
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double p = pred.values[k];
        const double y = labels.values[k];
        check_open_unit(p, "fc_rg_loss");
        if (!(y >= 0.0 && y <= 1.0))
            throw std::invalid_argument("fc_rg_loss: labels outside [0,1]");
        const double w = std::pow(y, beta);
        const double e = y - p;
        const double ea = std::pow(e, ia);
        sum += w * ea * (-std::log(p));
        out.grad[k] =
            w * (double(ia) * std::pow(e, ia - 1) * std::log(p) - ea / p) / double(n);
    }
    out.value = sum / double(n);
    return out;
}

LossResult hinge_l2_loss(const Heatmap& pred, const LabelMap& labels,
                         const std::vector<unsigned char>& inside) {
    check_same_shape(pred, labels, "hinge_l2_loss");
    if (inside.size() != pred.values.size())
        throw std::invalid_argument("hinge_l2_loss: region mask size mismatch");
    const size_t n = pred.values.size();
    LossResult out;
    out.grad.assign(n, 0.0);
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double p = pred.values[k];
        if (inside[k]) {
            const double d = p - labels.values[k];
            sum += d * d;
            out.grad[k] = 2.0 * d / double(n);
        } else if (p > 0.0) {
            sum += p * p;
            out.grad[k] = 2.0 * p / double(n);
        }
    }
    out.value = sum / double(n);
    return out;
}

LossResult l1_loss(const std::vector<double>& pred, const std::vector<double>& gt) {
    if (pred.size() != gt.size() || pred.empty())
        throw std::invalid_argument("l1_loss: size mismatch or empty input");
    const size_t n = pred.size();
    LossResult out;
    out.grad.assign(n, 0.0);
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double d = pred[k] - gt[k];
        sum += std::abs(d);
        out.grad[k] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / double(n);
    }
    out.value = sum / double(n);
    return out;
}

LossResult bce_loss(const Heatmap& pred, const std::vector<double>& targets) {
    if (targets.size() != pred.values.size() || pred.values.empty())
        throw std::invalid_argument("bce_loss: size mismatch or empty input");
    const size_t n = pred.values.size();
    LossResult out;
    out.grad.assign(n, 0.0);
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double p = pred.values[k];
        check_open_unit(p, "bce_loss");
        const double t = std::clamp(targets[k], 1e-6, 1.0 - 1e-6);
        sum += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        out.grad[k] = (-t / p + (1.0 - t) / (1.0 - p)) / double(n);
    }
    out.value = sum / double(n);
    return out;
}

ResidualResult disc_residual(const std::vector<double>& pred, const ResidualParams& params) {
    const size_t n = pred.size();
    if (params.v.size() != n || params.m.size() != n || params.y.size() != n || n == 0)
        throw std::invalid_argument("disc_residual: size mismatch or empty input");
    ResidualResult out;
    out.residual.resize(n);
    out.jac_diag.resize(n);
    for (size_t k = 0; k < n; ++k) {
        const double p = pred[k];
        const double m = params.m[k];
        const double v = params.v[k];
        const double act = m * p + (1.0 - m) * std::max(0.0, p);
        out.residual[k] = v * (act - params.y[k]);
        out.jac_diag[k] = v * (m + (1.0 - m) * (p > 0.0 ? 1.0 : 0.0));
        out.loss += 0.5 * out.residual[k] * out.residual[k];
    }
    return out;
}

ResidualParams make_residual_params(const LabelMap& pseudo, double cy, double cx,
                                    double target_radius) {
    if (pseudo.anchors != 1) throw std::invalid_argument("make_residual_params: A must be 1");
    if (target_radius <= 0.0)
        throw std::invalid_argument("make_residual_params: radius must be positive");
    const size_t n = pseudo.values.size();
    ResidualParams out;
    out.v.resize(n);
    out.m.resize(n);
    out.y.resize(n);
    for (int i = 0; i < pseudo.height; ++i)
        for (int j = 0; j < pseudo.width; ++j) {
            const int k = pseudo.index(i, j);
            const double d = std::hypot(i - cy, j - cx);
            const double m = std::clamp(1.0 - d / target_radius, 0.0, 1.0);
            out.m[k] = m;
            const double y = pseudo.values[k];
            if (y == -1.0) {
                out.v[k] = 0.0;
                out.y[k] = 0.0;
            } else {
                out.v[k] = 1.0 + m;
                out.y[k] = y;
            }
        }
    return out;
}

TotalLossResult total_loss(const Heatmap& robust_pred, const LabelMap& robust_labels,
                           const Heatmap& accurate_pred, const LabelMap& accurate_labels,
                           const std::vector<double>& box_pred, const std::vector<double>& box_gt,
                           const Heatmap& iou_pred, const std::vector<double>& iou_targets,
                           const LossConfig& cfg) {
    check_same_shape(robust_pred, robust_labels, "total_loss");
    check_same_shape(accurate_pred, accurate_labels, "total_loss");
    if (box_pred.size() != accurate_pred.values.size() * 4 || box_pred.size() != box_gt.size())
        throw std::invalid_argument("total_loss: box array size mismatch");
    if (iou_pred.values.size() != accurate_pred.values.size())
        throw std::invalid_argument("total_loss: iou map size mismatch");

    std::vector<unsigned char> inside(robust_pred.values.size());
    for (size_t k = 0; k < inside.size(); ++k)
        inside[k] = robust_labels.values[k] >= 0.25 ? 1 : 0;
    LossResult hinge = hinge_l2_loss(robust_pred, robust_labels, inside);

    LossResult focal = focal_loss(accurate_pred, accurate_labels, cfg.focal_gamma);

    // Box regression counts only positive-label slots, 4 offsets each.
    std::vector<double> bp, bg;
    std::vector<size_t> slots;
    for (size_t k = 0; k < accurate_labels.values.size(); ++k) {
        if (accurate_labels.values[k] != 1.0) continue;
        for (int c = 0; c < 4; ++c) {
            bp.push_back(box_pred[k * 4 + c]);
            bg.push_back(box_gt[k * 4 + c]);
            slots.push_back(k * 4 + c);
        }
    }
    if (bp.empty()) throw std::invalid_argument("total_loss: no positive cells for box loss");
    LossResult l1 = l1_loss(bp, bg);

    LossResult bce = bce_loss(iou_pred, iou_targets);

    TotalLossResult out;
    out.hinge = hinge.value;
    out.focal = focal.value;
    out.l1 = l1.value;
    out.bce = bce.value;
    out.total = cfg.lambda_r * hinge.value + cfg.lambda_a * focal.value +
                cfg.lambda_b * l1.value + cfg.lambda_o * bce.value;
    out.d_robust = std::move(hinge.grad);
    for (double& g : out.d_robust) g *= cfg.lambda_r;
    out.d_accurate = std::move(focal.grad);
    for (double& g : out.d_accurate) g *= cfg.lambda_a;
    out.d_box.assign(box_pred.size(), 0.0);
    for (size_t c = 0; c < slots.size(); ++c)
        out.d_box[slots[c]] = cfg.lambda_b * l1.grad[c];
    out.d_iou = std::move(bce.grad);
    for (double& g : out.d_iou) g *= cfg.lambda_o;
    return out;
}

}  // namespace dualtrack
