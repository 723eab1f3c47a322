#include "swarm/agents/session.hpp"

#include <algorithm>
#include <cmath>

namespace swarm::agents {

TokenModel TokenModel::for_profile(const RoleProfile& p) {
    TokenModel m;
    if (p.avg_turns > 0) {
        m.append_mean = 2.0 * p.avg_in / (p.avg_turns * (p.avg_turns + 1.0));
        m.out_mean = p.avg_out / p.avg_turns;
    }
    return m;
}

Session::Session(AgentRecord record, TaskRef task, std::unique_ptr<Policy> policy, TokenModel tokens, double avg_turns,
                 SessionLimits limits, Rng rng)
    : record_(std::move(record)),
      task_(std::move(task)),
      policy_(std::move(policy)),
      tokens_(tokens),
      avg_turns_(avg_turns),
      limits_(limits),
      rng_(std::move(rng)) {}

void Session::revise(std::vector<std::string> feedback) { feedback_ = std::move(feedback); }

void Session::adopt(Plan plan, double budget_mean) {
    steps_.assign(plan.steps.begin(), plan.steps.end());
    terminal_ = std::move(plan.terminal);
    replan_ = plan.replan;
    const auto budget = static_cast<std::int64_t>(std::llround(rng_.lognormal_with_mean(budget_mean, limits_.budget_sigma)));
    padding_ = std::max<std::int64_t>(0, budget - static_cast<std::int64_t>(steps_.size()) - 1);
}

toolhost::ToolCall Session::exploration(const PlanContext& ctx) {
    toolhost::ToolCall c;
    c.caller = record_.id;
    c.branch = ctx.branch;
    std::vector<std::string> code;
    for (const auto& [path, file] : ctx.main.files) code.push_back(path);
    std::vector<std::string> names;
    for (const auto& [name, located] : ctx.main.decls) names.push_back(name);
    const bool has_worktree = ctx.repo.worktree(ctx.branch).has_value();

    switch (rng_.below(9)) {
        case 0:
        case 1:
            if (!code.empty()) {
                c.tool = "read_file";
                c.args = {{"path", code[rng_.below(code.size())]}};
                return c;
            }
            break;
        case 2:
            if (!names.empty()) {
                c.tool = "ref_search";
                c.args = {{"name", name_stem(names[rng_.below(names.size())])}};
                return c;
            }
            break;
        case 3:
            if (!names.empty()) {
                c.tool = "ref_grep";
                c.args = {{"pattern", names[rng_.below(names.size())]}};
                return c;
            }
            break;
        case 4:
            c.tool = "list_issues";
            c.args = {{"status", "open"}};
            return c;
        case 5:
            if (!code.empty()) {
                c.tool = "shell";
                c.args = {{"command", "grep -c sorry " + code[rng_.below(code.size())]}};
                return c;
            }
            break;
        case 6:
            if (!names.empty()) {
                c.tool = "check_snippet";
                c.args = {{"code", "thm probe needs " + names[rng_.below(names.size())] + ". sorry."}};
                return c;
            }
            break;
        case 7:
            c.tool = has_worktree ? "git_status" : "git_log";
            return c;
        default: break;
    }
    c.tool = "list_files";
    c.args = {{"path", "chapters"}};
    return c;
}

TurnReport Session::step(const PlanContext& ctx, const toolhost::ToolHost& host, toolhost::ToolEnv& env) {
    TurnReport rep;
    if (!planned_) {
        adopt(policy_->plan(ctx), avg_turns_);
        planned_ = true;
    } else if (feedback_) {
        auto fb = std::move(*feedback_);
        feedback_.reset();
        adopt(policy_->revise(ctx, fb), std::max(1.0, avg_turns_ * limits_.revision_fraction));
    }
    if (record_.turns >= limits_.max_turns) {
        rep.max_iterations = true;
        return rep;
    }
    if (steps_.empty() && replan_) {
        auto p = policy_->plan(ctx);
        steps_.assign(p.steps.begin(), p.steps.end());
        terminal_ = std::move(p.terminal);
        replan_ = p.replan;
    }

    const auto total = padding_ + static_cast<std::int64_t>(steps_.size());
    const bool explore = padding_ > 0 && (steps_.empty() || rng_.below(static_cast<std::uint64_t>(total)) <
                                                                static_cast<std::uint64_t>(padding_));
    SimTime tool_time = 0;
    if (explore || !steps_.empty()) {
        toolhost::ToolCall c;
        if (explore) {
            c = exploration(ctx);
            --padding_;
            rep.exploration = true;
        } else {
            c.tool = steps_.front().tool;
            c.args = steps_.front().args;
            c.caller = record_.id;
            c.branch = ctx.branch;
            steps_.pop_front();
        }
        const auto r = host.dispatch(c, env);
        rep.tool = c.tool;
        rep.ok = r.ok;
        rep.error = r.error;
        rep.truncated = r.truncated;
        tool_time = r.duration;
        if (r.ok && c.tool == "create_issue" && r.output.starts_with("created issue ")) {
            auto id = r.output.substr(14);
            while (!id.empty() && id.back() == '\n') id.pop_back();
            created_.push_back(id);
        }
        if (!r.ok && !explore) {
            // A planned step that fails leaves the work in an unknown state: give up.
            steps_.clear();
            replan_ = false;
            if (terminal_.kind != TerminalKind::verdict) {
                terminal_ = Terminal{};
                terminal_.reason = c.tool + " failed: " + r.output.substr(0, 200);
            }
        }
    } else {
        auto t = terminal_;
        if (t.cite_created) {
            for (const auto& id : created_) {
                if (std::find(t.refs.begin(), t.refs.end(), id) == t.refs.end()) t.refs.push_back(id);
            }
        }
        rep.terminal = std::move(t);
    }

    const double append = rng_.lognormal_with_mean(std::max(1.0, tokens_.append_mean), tokens_.sigma);
    const double out = rng_.lognormal_with_mean(std::max(1.0, tokens_.out_mean), tokens_.sigma);
    context_ += static_cast<std::int64_t>(std::llround(append));
    rep.tokens_in = context_;
    rep.tokens_out = static_cast<std::int64_t>(std::llround(out));
    record_.turns += 1;
    record_.tokens_in += rep.tokens_in;
    record_.tokens_out += rep.tokens_out;

    const auto think = std::min<double>(static_cast<double>(limits_.think_cap),
                                        rng_.lognormal_with_mean(static_cast<double>(limits_.think_mean), 0.5));
    rep.duration = static_cast<SimTime>(think) + tool_time;
    return rep;
}

Json Session::save() const {
    Json steps = Json::array();
    for (const auto& s : steps_) steps.push_back(Json{{"tool", s.tool}, {"args", s.args}});
    Json j{{"planned", planned_},
           {"steps", steps},
           {"terminal", to_json(terminal_)},
           {"replan", replan_},
           {"padding", padding_},
           {"created", created_},
           {"context", context_},
           {"rng", rng_.save()},
           {"policy", policy_->save()}};
    if (feedback_) j["feedback"] = *feedback_;
    return j;
}

void Session::load(const Json& j) {
    planned_ = j.at("planned").get<bool>();
    steps_.clear();
    for (const auto& s : j.at("steps")) steps_.push_back(Step{s.at("tool").get<std::string>(), s.at("args")});
    terminal_ = terminal_from_json(j.at("terminal"));
    replan_ = j.at("replan").get<bool>();
    padding_ = j.at("padding").get<std::int64_t>();
    created_ = j.at("created").get<std::vector<std::string>>();
    context_ = j.at("context").get<std::int64_t>();
    rng_.load(j.at("rng").get<std::string>());
    policy_->load(j.at("policy"));
    if (j.contains("feedback")) {
        feedback_ = j.at("feedback").get<std::vector<std::string>>();
    } else {
        feedback_.reset();
    }
}

}  // namespace swarm::agents
