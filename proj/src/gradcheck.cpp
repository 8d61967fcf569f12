#include "hiconn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hiconn {

namespace {

double loss_value(const Subject& s, const Model& m) {
    NoGradScope no_grad;
    ForwardResult fwd = forward_subject(s, m);
    return total_loss(fwd.logits, s.label_index(), fwd.modularity_loss, m.config).item();
}

struct Structure {
    std::vector<std::vector<std::size_t>> regional;
    std::vector<std::vector<std::size_t>> modules;
    bool operator==(const Structure&) const = default;
};

Structure structure_of(const Subject& s, const Model& m) {
    NoGradScope no_grad;
    ForwardResult fwd = forward_subject(s, m);
    return {fwd.regional_sets, fwd.partition.modules};
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
    return std::fabs(analytic - numeric) / denom;
}

Subject toy_subject() {
    // Communities {0,1,2} and {3,4,5}, one bridge 2-3 in SC; MC differs in weights
    // and has its own bridge 1-4.
    Matrix sc = Matrix::from_rows({{0.0, 0.9, 0.6, 0.0, 0.0, 0.0},
                                   {0.9, 0.0, 0.8, 0.0, 0.0, 0.0},
                                   {0.6, 0.8, 0.0, 0.2, 0.0, 0.0},
                                   {0.0, 0.0, 0.2, 0.0, 0.7, 0.5},
                                   {0.0, 0.0, 0.0, 0.7, 0.0, 1.0},
                                   {0.0, 0.0, 0.0, 0.5, 1.0, 0.0}});
    Matrix mc = Matrix::from_rows({{0.0, 0.5, 0.7, 0.0, 0.0, 0.1},
                                   {0.5, 0.0, 0.4, 0.0, 0.3, 0.0},
                                   {0.7, 0.4, 0.0, 0.0, 0.0, 0.0},
                                   {0.0, 0.0, 0.0, 0.0, 0.6, 0.8},
                                   {0.0, 0.3, 0.0, 0.6, 0.0, 0.4},
                                   {0.1, 0.0, 0.0, 0.8, 0.4, 0.0}});
    return make_subject("toy", sc, mc, 1);
}

TrainConfig toy_config(std::uint64_t seed) {
    TrainConfig c;
    c.seed = seed;
    c.embed_dim = 6;
    c.modules = 3;
    c.threshold = 0.5;
    c.neighbor_budget = 2;
    c.classifier_hidden = 8;
    return c;
}

GradCheckReport gradient_check(const Subject& subject, Model& model, double h) {
    std::vector<Tensor> params = model.parameters();
    std::vector<std::string> names = model.parameter_names();
    for (Tensor& p : params) p.zero_grad();
    Tape tape;
    Tensor loss;
    {
        TapeScope scope(tape);
        ForwardResult fwd = forward_subject(subject, model);
        loss = total_loss(fwd.logits, subject.label_index(), fwd.modularity_loss, model.config);
    }
    tape.backward(loss);

    const Structure reference = structure_of(subject, model);
    GradCheckReport report;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix analytic = params[p].grad();
        Matrix& w = params[p].mutable_value();
        GradCheckEntry group_worst{names[p]};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double original = w.data[i];
            w.data[i] = original + h;
            double up = loss_value(subject, model);
            bool stable = structure_of(subject, model) == reference;
            w.data[i] = original - h;
            double down = loss_value(subject, model);
            stable = stable && structure_of(subject, model) == reference;
            w.data[i] = original;
            report.structure_stable = report.structure_stable && stable;

            GradCheckEntry e{names[p], i, analytic.data[i], (up - down) / (2.0 * h), 0.0};
            e.rel_error = relative_error(e.analytic, e.numeric);
            ++report.checked;
            if (e.rel_error >= group_worst.rel_error) group_worst = e;
            if (e.rel_error >= report.max_rel_error) {
                report.max_rel_error = e.rel_error;
                report.worst = e;
            }
        }
        report.per_parameter.push_back(group_worst);
    }
    return report;
}

}  // namespace hiconn
