#pragma once

#include <string>
#include <vector>

#include "volcap/energy/energy.hpp"
#include "volcap/solve/descent.hpp"

namespace volcap {

struct SolveConfig {
    EnergyConfig energy;
    DescentOptions descent;
    int stage1_phase_iterations = 300;
    int stage2_iterations = 500;
    Vec3 volume_center = Vec3(0, 1, 0);  // stage-I starting point
    int threads = 1;
};

struct StagePhase {
    std::string name;
    std::vector<bool> mask;  // over the packed parameter vector
    int max_iterations;
};

struct SolveState {
    MatX poses;  // pose_dim x frames
    VecX shape;
    double energy = 0.0;
    std::vector<DescentTraceRow> trace;
    std::vector<std::string> phase_log;
};

namespace detail {

inline std::vector<bool> phase_mask(const SpaceTimeProblem& problem, bool root,
                                    const std::vector<int>& joints, bool shape) {
    const Skeleton& skel = problem.template_model.skeleton;
    std::vector<bool> mask(problem.param_count(), false);
    for (int t = 0; t < problem.frames; ++t) {
        const int base = t * problem.pose_dim();
        if (root)
            for (int k = 0; k < 6; ++k) mask[base + k] = true;
        for (int j : joints)
            for (std::size_t k = 0; k < skel.joint(j).dofs.size(); ++k)
                mask[base + skel.dof_param_index(j, static_cast<int>(k))] = true;
    }
    if (shape)
        for (int k = 0; k < problem.shape_dim(); ++k)
            mask[problem.frames * problem.pose_dim() + k] = true;
    return mask;
}

inline std::vector<int> all_joints(const Skeleton& skel) {
    std::vector<int> joints(skel.joint_count());
    for (int j = 0; j < skel.joint_count(); ++j) joints[j] = j;
    return joints;
}

inline SolveState run_phases(const SpaceTimeProblem& problem, VecX x,
                             const std::vector<StagePhase>& phases, const SolveConfig& cfg) {
    auto fn = [&problem](const VecX& v, VecX* grad) { return problem.evaluate(v, grad); };
    SolveState state;
    for (const StagePhase& phase : phases) {
        DescentOptions opt = cfg.descent;
        opt.max_iterations = phase.max_iterations;
        DescentResult res = conditioned_descent(fn, x, opt, phase.mask);
        x = res.x;
        state.energy = res.energy;
        state.phase_log.push_back(phase.name + ": " + std::to_string(res.accepted_steps) +
                                  " accepted steps, energy " + std::to_string(res.energy));
        state.trace.insert(state.trace.end(), res.trace.begin(), res.trace.end());
    }
    state.poses = problem.poses_of(x);
    state.shape = problem.shape_of(x);
    return state;
}

}  // namespace detail

/// Stage I: detection-driven initialization. Starts from the mean shape in
/// T-pose at the capture volume center and solves hierarchically: root and
/// torso first, then the limbs, then all pose parameters jointly with the
/// shape coefficients (bone lengths move through the shape space).
inline SolveState solve_stage1(const SpaceTimeProblem& problem, const SolveConfig& cfg) {
    if (problem.stage != Stage::kDetection)
        throw InvalidArgumentError("solve_stage1: problem must carry the detection data term");
    if (problem.heatmaps.cameras() == 0)
        throw InputError("solve_stage1: no heat maps");
    bool any = false;
    for (int c = 0; c < problem.heatmaps.cameras() && !any; ++c)
        for (int t = 0; t < problem.heatmaps.frames() && !any; ++t)
            for (int j = 0; j < problem.heatmaps.joints() && !any; ++j) {
                const Image& m = problem.heatmaps.at(c, t, j);
                for (float v : m.data())
                    if (v > 0) {
                        any = true;
                        break;
                    }
            }
    if (!any) throw InputError("solve_stage1: all heat maps are empty");

    const Skeleton& skel = problem.template_model.skeleton;
    MatX poses = MatX::Zero(problem.pose_dim(), problem.frames);
    const Vec3 start = cfg.volume_center - skel.root_offset();
    for (int t = 0; t < problem.frames; ++t) poses.col(t).head<3>() = start;
    VecX x = problem.pack(poses, VecX::Zero(problem.shape_dim()));

    const std::vector<int> torso = skel.torso_joints.empty() ? detail::all_joints(skel)
                                                             : skel.torso_joints;
    const std::vector<int> limbs = skel.limb_joints;
    std::vector<StagePhase> phases;
    phases.push_back({"stage1/torso", detail::phase_mask(problem, true, torso, false),
                      cfg.stage1_phase_iterations});
    if (!limbs.empty())
        phases.push_back({"stage1/limbs", detail::phase_mask(problem, false, limbs, false),
                          cfg.stage1_phase_iterations});
    phases.push_back({"stage1/all",
                      detail::phase_mask(problem, true, detail::all_joints(skel),
                                         problem.shape_dim() > 0),
                      cfg.stage1_phase_iterations});

    return detail::run_phases(problem, x, phases, cfg);
}

/// Stage II: joint space-time refinement of all pose and shape parameters
/// against the contour data term.
inline SolveState solve_stage2(const SpaceTimeProblem& problem, const SolveState& init,
                               const SolveConfig& cfg) {
    if (problem.stage != Stage::kContour)
        throw InvalidArgumentError("solve_stage2: problem must carry the contour data term");
    if (init.poses.cols() != problem.frames)
        throw InputError("solve_stage2: initialization frame count mismatch");
    VecX x = problem.pack(init.poses, init.shape);
    std::vector<StagePhase> phases = {
        {"stage2/joint",
         detail::phase_mask(problem, true, detail::all_joints(problem.template_model.skeleton),
                            problem.shape_dim() > 0),
         cfg.stage2_iterations}};
    return detail::run_phases(problem, x, phases, cfg);
}

}  // namespace volcap
