import { describe, expect, it } from 'vitest';

import { STRATEGIES, isStrategy, validateSusAnswers } from '../src/survey.js';

describe('survey models', () => {
	it('exposes the five password strategies', () => {
		expect(STRATEGIES).toEqual([
			'colours',
			'shapes',
			'geometric patterns',
			'first attention object',
			'other',
		]);
		expect(isStrategy('shapes')).toBe(true);
		expect(isStrategy('telepathy')).toBe(false);
	});

	it('accepts a valid SUS response', () => {
		expect(validateSusAnswers([1, 2, 3, 4, 5, 5, 4, 3, 2, 1])).toBeNull();
	});

	it('rejects wrong lengths and out-of-range answers', () => {
		expect(validateSusAnswers([3, 3, 3])).toMatch(/expected 10/);
		expect(validateSusAnswers([0, 3, 3, 3, 3, 3, 3, 3, 3, 3])).toMatch(/answer 1/);
		expect(validateSusAnswers([3, 3, 3, 3, 3, 3, 3, 3, 3, 6])).toMatch(/answer 10/);
		expect(validateSusAnswers([3, 3, 3, 3, 3.5, 3, 3, 3, 3, 3])).toMatch(/answer 5/);
	});
});
