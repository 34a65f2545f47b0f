use serde::Serialize;

use crate::ir::NpcActor;

/// Minimum score for two actors to be treated as the same entity.
pub const MATCH_THRESHOLD: u32 = 2;

/// Position compatibility of a textual and a visual actor.
pub fn match_score(text: &NpcActor, visual: &NpcActor) -> u32 {
    let mut score = 0;
    if let (Some(a), Some(b)) = (text.lane_idx.get(), visual.lane_idx.get()) {
        if a == b {
            score += 2;
        }
    }
    if let (Some(a), Some(b)) = (text.relative_position(), visual.relative_position()) {
        if a == b {
            score += 1;
        }
    }
    if text.actor_type == visual.actor_type {
        score += 1;
    }
    score
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ActorPair {
    pub text: usize,
    pub visual: usize,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pub pairs: Vec<ActorPair>,
    pub text_only: Vec<usize>,
    pub visual_only: Vec<usize>,
}

/// Greedy matching by descending score. Equal scores go to the pair that
/// comes first in canonical order (text index, then visual index), so the
/// inputs are expected to be canonically ordered.
pub fn match_actors(text: &[NpcActor], visual: &[NpcActor]) -> Matching {
    let mut candidates: Vec<ActorPair> = Vec::new();
    for (t, ta) in text.iter().enumerate() {
        for (v, va) in visual.iter().enumerate() {
            let score = match_score(ta, va);
            if score >= MATCH_THRESHOLD {
                candidates.push(ActorPair { text: t, visual: v, score });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(a.text.cmp(&b.text))
            .then(a.visual.cmp(&b.visual))
    });
    let mut text_used = vec![false; text.len()];
    let mut visual_used = vec![false; visual.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if !text_used[c.text] && !visual_used[c.visual] {
            text_used[c.text] = true;
            visual_used[c.visual] = true;
            pairs.push(c);
        }
    }
    pairs.sort_by_key(|p| (p.text, p.visual));
    Matching {
        pairs,
        text_only: (0..text.len()).filter(|&i| !text_used[i]).collect(),
        visual_only: (0..visual.len()).filter(|&i| !visual_used[i]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ActorKind, Position, RelativePosition, Tri};

    fn actor(kind: ActorKind, lane: Option<u32>, rel: RelativePosition) -> NpcActor {
        let mut a = NpcActor::new(kind);
        a.lane_idx = lane.into();
        a.position = Tri::Specified(Position::of_ego(rel));
        a
    }

    #[test]
    fn identical_positions_match() {
        let t = [actor(ActorKind::Car, Some(1), RelativePosition::Front)];
        let v = [actor(ActorKind::Car, Some(1), RelativePosition::Front)];
        let m = match_actors(&t, &v);
        assert_eq!(m.pairs, vec![ActorPair { text: 0, visual: 0, score: 4 }]);
    }

    #[test]
    fn below_threshold_stays_apart() {
        let t = [actor(ActorKind::Car, None, RelativePosition::FrontLeft)];
        let v = [actor(ActorKind::Car, Some(0), RelativePosition::Front)];
        assert_eq!(match_score(&t[0], &v[0]), 1);
        let m = match_actors(&t, &v);
        assert!(m.pairs.is_empty());
        assert_eq!((m.text_only, m.visual_only), (vec![0], vec![0]));
    }

    #[test]
    fn higher_scores_win_first() {
        let t = [
            actor(ActorKind::Car, Some(0), RelativePosition::Left),
            actor(ActorKind::Car, Some(0), RelativePosition::FrontLeft),
        ];
        let v = [actor(ActorKind::Car, Some(0), RelativePosition::FrontLeft)];
        let m = match_actors(&t, &v);
        assert_eq!(m.pairs, vec![ActorPair { text: 1, visual: 0, score: 4 }]);
        assert_eq!(m.text_only, vec![0]);
    }
}
