import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { CurtainReveal } from '../src/reveal.js';

function makeCover(): HTMLElement {
	const cover = document.createElement('div');
	document.body.appendChild(cover);
	return cover;
}

// Date is faked by vi.useFakeTimers, so drive the reveal clock from it.
const fakeNow = () => Date.now();

describe('CurtainReveal', () => {
	beforeEach(() => {
		vi.useFakeTimers();
	});

	afterEach(() => {
		vi.useRealTimers();
		document.body.innerHTML = '';
	});

	it('completes an LTR reveal in 20 s within the 200 ms budget, monotonically', async () => {
		const reveal = new CurtainReveal(makeCover(), { direction: 'LTR' }, fakeNow);
		const done = reveal.play();
		await vi.advanceTimersByTimeAsync(25_000);
		const stamps = await done;

		const elapsed = stamps.endedAt - stamps.startedAt;
		expect(elapsed).toBeGreaterThanOrEqual(19_800);
		expect(elapsed).toBeLessThanOrEqual(20_200);

		expect(reveal.revealedFraction).toBe(1);
		const fractions = reveal.samples.map((s) => s.fraction);
		for (let i = 1; i < fractions.length; i++) {
			expect(fractions[i]).toBeGreaterThanOrEqual(fractions[i - 1]);
		}
		expect(fractions[0]).toBe(0);
	});

	it('RTL behaves identically on timing', async () => {
		const reveal = new CurtainReveal(makeCover(), { direction: 'RTL' }, fakeNow);
		const done = reveal.play();
		await vi.advanceTimersByTimeAsync(21_000);
		const stamps = await done;
		expect(stamps.endedAt - stamps.startedAt).toBeLessThanOrEqual(20_200);
		expect(reveal.revealedFraction).toBe(1);
	});

	it('shows the left half at half time for LTR', async () => {
		const cover = makeCover();
		const reveal = new CurtainReveal(cover, { direction: 'LTR' }, fakeNow);
		void reveal.play();
		await vi.advanceTimersByTimeAsync(10_000);
		expect(reveal.revealedFraction).toBeCloseTo(0.5, 2);
		// revealed region grows from the left: cover sits on the right half
		expect(parseFloat(cover.style.left)).toBeCloseTo(50, 0);
		expect(parseFloat(cover.style.width)).toBeCloseTo(50, 0);
		await vi.advanceTimersByTimeAsync(11_000);
	});

	it('keeps the RTL cover anchored to the left edge', async () => {
		const cover = makeCover();
		const reveal = new CurtainReveal(cover, { direction: 'RTL' }, fakeNow);
		void reveal.play();
		await vi.advanceTimersByTimeAsync(5_000);
		expect(cover.style.left).toBe('0%');
		expect(parseFloat(cover.style.width)).toBeCloseTo(75, 0);
		await vi.advanceTimersByTimeAsync(16_000);
	});

	it('starts from a fully white cover', async () => {
		const cover = makeCover();
		const reveal = new CurtainReveal(cover, { direction: 'LTR' }, fakeNow);
		void reveal.play();
		expect(cover.style.background).toContain('fff');
		expect(parseFloat(cover.style.width)).toBe(100);
		expect(reveal.revealedFraction).toBe(0);
		await vi.advanceTimersByTimeAsync(21_000);
	});

	it('never regresses across dropped frames', async () => {
		const cover = makeCover();
		const reveal = new CurtainReveal(cover, { direction: 'LTR', durationMs: 1_000 }, fakeNow);
		const done = reveal.play();
		await vi.advanceTimersByTimeAsync(120);
		const before = reveal.revealedFraction;
		// a dropped-frame stall: one giant jump instead of steady ticks
		await vi.advanceTimersByTimeAsync(700);
		expect(reveal.revealedFraction).toBeGreaterThanOrEqual(before);
		await vi.advanceTimersByTimeAsync(400);
		await done;
		const fractions = reveal.samples.map((s) => s.fraction);
		for (let i = 1; i < fractions.length; i++) {
			expect(fractions[i]).toBeGreaterThanOrEqual(fractions[i - 1]);
		}
	});

	it('direction none shows the image immediately', async () => {
		const cover = makeCover();
		const reveal = new CurtainReveal(cover, { direction: 'none' }, fakeNow);
		const stamps = await reveal.play();
		expect(stamps.endedAt).toBe(stamps.startedAt);
		expect(reveal.revealedFraction).toBe(1);
		expect(parseFloat(cover.style.width)).toBe(0);
	});

	it('respects a custom duration knob', async () => {
		const reveal = new CurtainReveal(
			makeCover(),
			{ direction: 'LTR', durationMs: 2_000, frameIntervalMs: 25 },
			fakeNow,
		);
		const done = reveal.play();
		await vi.advanceTimersByTimeAsync(2_100);
		const stamps = await done;
		expect(stamps.endedAt - stamps.startedAt).toBeGreaterThanOrEqual(2_000);
		expect(stamps.endedAt - stamps.startedAt).toBeLessThanOrEqual(2_050);
	});
});
