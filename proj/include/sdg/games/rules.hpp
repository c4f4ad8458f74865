#pragma once

#include "sdg/core/types.hpp"

namespace sdg {

// Canonical rule summaries rendered into the {game_rules} slot of every
// prompt. Byte-identical for all players of a match.
inline RulesText rules_text(GameKind game) {
    switch (game) {
        case GameKind::Werewolf:
            return {GameKind::Werewolf,
                    "Werewolf, 7 players. Roles: 2 Werewolves, 1 Seer, 1 Guardian, 3 Villagers.\n"
                    "The werewolves know each other. Play alternates between night and day.\n"
                    "Night: the werewolves pick one victim (the lower-numbered living werewolf "
                    "proposes a target, the other makes the final decision); the Seer learns "
                    "whether one chosen living player is a werewolf; the Guardian protects one "
                    "living player. The victim survives if protected, otherwise they are "
                    "eliminated at dawn.\n"
                    "Day: the elimination (or its absence) is announced without revealing any "
                    "role. Living players speak once each in seat order, then vote to eliminate "
                    "one other living player or abstain. The player with the most votes is "
                    "eliminated; roles of the eliminated are never revealed.\n"
                    "The werewolves win when they are at least half of the living players. The "
                    "village wins when both werewolves are eliminated."};
        case GameKind::Avalon:
            return {GameKind::Avalon,
                    "Avalon, 5 players. Good: 2 Loyal Servants and Merlin, who knows which "
                    "players are evil. Evil: 1 Minion and the Assassin, who know each other.\n"
                    "Five quests are attempted with team sizes 2, 3, 2, 3, 3. The leader "
                    "proposes a team of the required size, players discuss, then everyone "
                    "votes openly; a strict majority of approvals sends the team on the quest, "
                    "otherwise leadership passes to the next player. A fifth consecutive "
                    "rejection forces the current proposal through. Quest members secretly "
                    "play Success or Fail (good players must play Success); any Fail card "
                    "fails the quest, and only the counts are revealed.\n"
                    "Three failed quests win the game for evil. After three successful quests "
                    "the Assassin names one player; evil wins if that player is Merlin, "
                    "otherwise good wins."};
        case GameKind::Onuw:
            return {GameKind::Onuw,
                    "One Night Werewolf, 5 players. Deck of 7 cards: 1 Werewolf, 2 Villagers, "
                    "1 Seer, 1 Robber, 1 Troublemaker, 1 Insomniac. Each player is dealt one "
                    "card and the remaining two lie face down in the center; the Werewolf card "
                    "is always dealt to a player.\n"
                    "One night passes. In order of original roles: the Werewolf learns it acts "
                    "alone; the Seer may look at one other player's card or skip; the Robber "
                    "may swap cards with another player and look at the card taken, or skip; "
                    "the Troublemaker swaps the cards of two other players without looking; "
                    "the Insomniac checks their own card. Cards moved by swaps act for their "
                    "new owners from then on.\n"
                    "In the morning players discuss once each in seat order, then everyone "
                    "votes to eliminate another player. Every player tied for the most votes "
                    "is eliminated and reveals their card. The village wins if the player "
                    "holding the Werewolf card at dawn is eliminated; otherwise the werewolf "
                    "side wins."};
    }
    throw Error("unknown game kind");
}

}  // namespace sdg
