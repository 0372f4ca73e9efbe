#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/agent.hpp>
#include <strengthlab/distributions.hpp>
#include <strengthlab/similarity.hpp>
#include <strengthlab/strength.hpp>

namespace strengthlab {

struct SessionConfig {
    std::string variable;
    double lambda = 0.5;
    ReferenceSet refset = ReferenceSet::continuous();
    std::string method = "direct";
    ProbeConfig probes;
};

enum class SessionStatus { AwaitingAnswers, AwaitingCandidate, Converged };
enum class ProposalOutcome { Accepted, Rejected, NeedsAnswers, JoinedFrontier };

std::string to_string(SessionStatus s);
std::string to_string(ProposalOutcome o);

/// One comparison to put to the judge: S(lhs probe, R(lambda)) against S(rhs probe, R(lambda)).
struct Question {
    std::string id;
    SimilarityTerm lhs;
    SimilarityTerm rhs;
    std::string lhs_shape;
    std::string rhs_shape;
    std::string purpose;  // floor (locating the proposal's weakest probe) or candidate
};

struct Answer {
    std::string question_id;
    Relation relation = Relation::Equal;
    std::string source = "human";
};

struct CandidateRecord {
    std::string id;
    Distribution dist;
};

struct HistoryEntry {
    std::string candidate_id;
    ProposalOutcome outcome = ProposalOutcome::Rejected;
    Verdict verdict = Verdict::Indeterminate;
    double coverage = 0.0;
    Distribution from;
    Distribution to;
};

struct ProposalResult {
    std::string candidate_id;
    ProposalOutcome outcome = ProposalOutcome::NeedsAnswers;
};

struct FrontierReport {
    std::vector<CandidateRecord> members;
    std::vector<std::vector<Verdict>> matrix;  // matrix[i][j]: member i against member j
    bool sensitivity_recommended = false;
    SessionStatus status = SessionStatus::AwaitingAnswers;
};

/// Iterative elicitation: the current proposal G is challenged by queued
/// candidates; a candidate replaces G once the store derives it internally
/// stronger. Questions are derived from the store, never stored, so a session is
/// fully described by its config, distributions and judgment log.
class ElicitationSession {
public:
    ElicitationSession() = default;

    static ElicitationSession start(std::string id, SessionConfig config, Distribution initial);

    const std::string& id() const { return id_; }
    const SessionConfig& config() const { return config_; }
    SessionStatus status() const;
    const Distribution& current() const { return current_; }
    const SimilarityStore& store() const { return store_; }
    const std::vector<HistoryEntry>& history() const { return history_; }
    const std::vector<CandidateRecord>& queue() const { return queue_; }
    const std::vector<CandidateRecord>& frontier() const { return frontier_; }

    /// Open questions, most blocking first; `batch` = 0 returns all of them.
    std::vector<Question> next_questions(std::size_t batch = 0) const;

    /// Fraction of the comparisons the active step needs that the store derives.
    double coverage() const;

    /// Records all answers or none. Throws UnknownQuestion or ConflictError.
    void submit_answers(const std::vector<Answer>& answers);

    ProposalResult propose_candidate(Distribution candidate);

    /// Outcome of an earlier proposal, once settled.
    std::optional<ProposalOutcome> outcome_of(const std::string& candidate_id) const;

    FrontierReport frontier_report() const;

    nlohmann::json to_json() const;
    static ElicitationSession from_json(const nlohmann::json& doc);

private:
    void validate_candidate(const Distribution& d) const;
    void advance();
    bool locate_floor();
    bool settle_front();
    bool dominates(const std::vector<SimilarityTerm>& winner, const Distribution& member) const;
    void index_direct(const Judgment& j);
    std::vector<SimilarityTerm> terms_of(const Distribution& d) const;
    std::vector<std::string> shapes_of(const Distribution& d) const;

    std::string id_;
    SessionConfig config_;
    Distribution initial_;
    Distribution current_;
    SimilarityStore store_;
    std::vector<CandidateRecord> queue_;
    std::vector<CandidateRecord> frontier_;
    std::vector<HistoryEntry> history_;
    std::uint64_t next_candidate_ = 1;
    int evaluated_since_accept_ = 0;

    // derived
    std::unordered_map<std::string, Relation> direct_;
    std::vector<Question> pending_;
    std::optional<SimilarityTerm> floor_;
    std::size_t needed_ = 0;
    std::size_t settled_ = 0;
};

/// Stable question id from the two term keys.
std::string question_id(const SimilarityTerm& lhs, const SimilarityTerm& rhs);

/// Pmf neighbours reached by moving `step` of mass between two outcomes; masses
/// are rounded to the step grid.
std::vector<Distribution> simplex_neighbours(const Distribution& pmf, double step = 0.01);

/// Nearest pmf on the step grid (largest-remainder rounding), exact masses.
Distribution snap_to_grid(const Distribution& pmf, double step = 0.01);

/// Mean and standard-deviation moves for a normal proposal.
std::vector<Distribution> normal_neighbours(const Distribution& normal, double step = 0.01);

struct AgentRunConfig {
    double step = 0.01;
    int max_accepts = 1000;
    std::size_t batch = 0;
};

struct AgentRunReport {
    Distribution final;
    int accepted = 0;
    int proposed = 0;
    std::size_t questions = 0;
    bool converged = false;
    std::size_t frontier_size = 0;
};

/// Drives a session to convergence with first-improvement hill climbing, letting
/// `agent` answer every question.
AgentRunReport run_agent_session(ElicitationSession& session, const SyntheticAgent& agent,
                                 const AgentRunConfig& config = {});

double total_variation(const Distribution& a, const Distribution& b);

void to_json(nlohmann::json& j, const Question& q);
void to_json(nlohmann::json& j, const FrontierReport& r);
void to_json(nlohmann::json& j, const ProposalResult& r);
void to_json(nlohmann::json& j, const AgentRunReport& r);
void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);
void from_json(const nlohmann::json& j, Answer& a);

}  // namespace strengthlab
