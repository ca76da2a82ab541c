/* Curtain reveal: an opaque white cover slides off the image at constant
 * speed (a linear sweep), driven by wall-clock time so dropped frames can
 * never make the revealed fraction regress. Direction 'none' shows the
 * image immediately. */

import type { RevealDirection } from './api.js';

export interface RevealSpec {
	direction: RevealDirection;
	durationMs?: number; // default 20 000
	frameIntervalMs?: number; // sweep granularity knob, default 50
}

export interface RevealTimestamps {
	startedAt: number;
	endedAt: number;
}

export interface RevealSample {
	t: number;
	fraction: number;
}

const DEFAULT_DURATION_MS = 20_000;
const DEFAULT_FRAME_MS = 50;

export class CurtainReveal {
	/** Instrumentation: (elapsed ms, revealed fraction) per frame. */
	readonly samples: RevealSample[] = [];
	private fraction = 0;

	constructor(
		private readonly cover: HTMLElement,
		private readonly spec: RevealSpec,
		private readonly now: () => number = () =>
			typeof performance !== 'undefined' ? performance.now() : Date.now(),
	) {}

	get revealedFraction(): number {
		return this.fraction;
	}

	/** Run the reveal to completion; resolves with start/end timestamps. */
	play(): Promise<RevealTimestamps> {
		const duration = this.spec.durationMs ?? DEFAULT_DURATION_MS;
		const frameMs = this.spec.frameIntervalMs ?? DEFAULT_FRAME_MS;
		this.cover.style.position = 'absolute';
		this.cover.style.top = '0';
		this.cover.style.height = '100%';
		this.cover.style.background = '#ffffff';

		const startedAt = this.now();
		if (this.spec.direction === 'none') {
			this.apply(1);
			this.samples.push({ t: 0, fraction: 1 });
			return Promise.resolve({ startedAt, endedAt: startedAt });
		}
		this.apply(0);
		this.samples.push({ t: 0, fraction: 0 });
		return new Promise((resolve) => {
			const timer = setInterval(() => {
				const elapsed = this.now() - startedAt;
				// monotone by construction: time only moves forward, and a
				// dropped frame just lands on a larger fraction
				const target = Math.min(1, elapsed / duration);
				this.apply(Math.max(this.fraction, target));
				this.samples.push({ t: elapsed, fraction: this.fraction });
				if (this.fraction >= 1) {
					clearInterval(timer);
					resolve({ startedAt, endedAt: this.now() });
				}
			}, frameMs);
		});
	}

	private apply(fraction: number): void {
		this.fraction = fraction;
		const coveredPercent = (1 - fraction) * 100;
		if (this.spec.direction === 'LTR') {
			// image appears from the left edge: cover clings to the right
			this.cover.style.left = `${fraction * 100}%`;
			this.cover.style.width = `${coveredPercent}%`;
		} else {
			// RTL (and the never-rendered 'none' end state): cover clings left
			this.cover.style.left = '0%';
			this.cover.style.width = `${coveredPercent}%`;
		}
	}
}
