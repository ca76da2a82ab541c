/* Click capture with no visual feedback.
 *
 * Clicks are mapped from viewport coordinates to integer image pixels
 * (floored), accounting for CSS display scaling of the element. Clicks
 * outside the image are ignored, as is everything past the fifth point.
 * The handler never touches the DOM, so nothing ever marks a click
 * location. Points live only in memory. */

import type { Point } from './api.js';

export const PASSWORD_LENGTH = 5;

export class ClickCapture {
	private readonly captured: Point[] = [];
	private readonly handler = (ev: MouseEvent) => this.handleClick(ev);
	private attached = false;

	constructor(
		private readonly element: HTMLElement,
		private readonly imageWidth: number,
		private readonly imageHeight: number,
		private readonly onChange?: (count: number) => void,
	) {}

	get points(): readonly Point[] {
		return this.captured;
	}

	/** Submission stays disabled until exactly five points are captured. */
	get complete(): boolean {
		return this.captured.length === PASSWORD_LENGTH;
	}

	start(): void {
		if (!this.attached) {
			this.element.addEventListener('click', this.handler);
			this.attached = true;
		}
	}

	stop(): void {
		if (this.attached) {
			this.element.removeEventListener('click', this.handler);
			this.attached = false;
		}
	}

	reset(): void {
		this.captured.length = 0;
		this.onChange?.(0);
	}

	/** Viewport coordinates -> integer image pixel, or null when outside. */
	mapToImagePixel(clientX: number, clientY: number): Point | null {
		const rect = this.element.getBoundingClientRect();
		if (rect.width <= 0 || rect.height <= 0) return null;
		const x = Math.floor(((clientX - rect.left) * this.imageWidth) / rect.width);
		const y = Math.floor(((clientY - rect.top) * this.imageHeight) / rect.height);
		if (x < 0 || y < 0 || x >= this.imageWidth || y >= this.imageHeight) return null;
		return [x, y];
	}

	takePoints(): Point[] {
		return this.captured.slice();
	}

	private handleClick(ev: MouseEvent): void {
		if (this.complete) return; // sixth click and beyond: ignored
		const point = this.mapToImagePixel(ev.clientX, ev.clientY);
		if (point === null) return; // outside the image: not counted
		this.captured.push(point);
		this.onChange?.(this.captured.length);
	}
}
