/* Questionnaire and SUS form models. */

export const STRATEGIES = [
	'colours',
	'shapes',
	'geometric patterns',
	'first attention object',
	'other',
] as const;

export type Strategy = (typeof STRATEGIES)[number];

export interface SessionOneAnswers {
	strategy: Strategy;
	strategy_details?: string;
	watched_reveal?: boolean;
	distracted?: boolean;
	seen_image_before?: boolean;
	touch_screen?: boolean;
	first_attention_click?: [number, number];
	demographics?: Record<string, string>;
	[extra: string]: unknown;
}

export const SUS_QUESTION_COUNT = 10;

export function validateSusAnswers(answers: number[]): string | null {
	if (answers.length !== SUS_QUESTION_COUNT) {
		return `expected ${SUS_QUESTION_COUNT} answers, got ${answers.length}`;
	}
	for (const [i, a] of answers.entries()) {
		if (!Number.isInteger(a) || a < 1 || a > 5) {
			return `answer ${i + 1} must be an integer 1..5, got ${a}`;
		}
	}
	return null;
}

export function isStrategy(value: unknown): value is Strategy {
	return typeof value === 'string' && (STRATEGIES as readonly string[]).includes(value);
}
